"""Shared test helpers."""

import subprocess
import sys


def run_cli(*args, timeout=600):
    """Run the CLI in a subprocess; returns (exit_code, stdout_bytes, stderr_text)."""
    proc = subprocess.run(
        [sys.executable, "-m", "haarlab.cli", *args],
        capture_output=True, timeout=timeout,
    )
    return proc.returncode, proc.stdout, proc.stderr.decode()
