"""Command-line front end.

Every subcommand is a thin client of the HTTP service: requests go to the
in-process app through an ASGI transport by default, or to a remote server
with --server.  Rendering is local, through the canonical JSON writer, so
equal payloads produce byte-identical output no matter where they came
from.

Exit codes: 0 all assertions passed, 1 a statistical check failed, 2
execution error, 64 usage error.
"""

from __future__ import annotations

import argparse
import asyncio
import os
import sys

import httpx

from . import serialize
from .densities import DensityPoint, Measure

EXIT_OK = 0
EXIT_STAT_FAIL = 1
EXIT_EXEC = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the contract says 64
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _int_list(text: str):
    try:
        return [int(x) for x in text.split(",") if x != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str):
    try:
        return [float(x) for x in text.split(",") if x != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _mixed_queries(text: str):
    """Parse 'a1,a2:b1,b2;...' into [{'a': [...], 'b': [...]}, ...]."""
    out = []
    for part in text.split(";"):
        if not part:
            continue
        try:
            a, b = part.split(":")
            out.append({"a": [int(x) for x in a.split(",")],
                        "b": [int(x) for x in b.split(",")]})
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected 'a1,a2:b1,b2' groups, got {part!r}")
    return out


def _point_tuples(text: str):
    """Parse 're,im re,im;re,im re,im' into [[[re, im], ...], ...]."""
    out = []
    for group in text.split(";"):
        if not group.strip():
            continue
        tup = []
        for token in group.split():
            try:
                re_, im_ = token.split(",")
                tup.append([float(re_), float(im_)])
            except ValueError:
                raise argparse.ArgumentTypeError(f"expected 're,im' pairs, got {token!r}")
        out.append(tup)
    return out


def _angle_tuples(text: str):
    return [[float(x) for x in group.split(",")] for group in text.split(";") if group.strip()]


def _add_common(p, formats=("json", "csv")):
    p.add_argument("--seed", type=int, default=None,
                   help="RNG seed (default: HAARLAB_SEED env var, else 0)")
    p.add_argument("--format", choices=list(formats), default="json",
                   help="output format (default: json)")
    p.add_argument("--output", default=None, help="output path (default: stdout)")
    p.add_argument("--server", default=None,
                   help="remote service URL (default: run the service in-process)")


def _add_mc(p):
    p.add_argument("--streams", type=int, default=None,
                   help="independent RNG streams (default: CPU count; recorded in meta)")
    p.add_argument("--workers", type=int, default=1,
                   help="threads executing streams; never affects the numbers")


def build_parser() -> _Parser:
    parser = _Parser(prog="haarlab",
                     description="Haar unitary sampling, exact formulas, and "
                                 "Monte Carlo verification of their limit laws.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw Haar unitaries or truncated blocks")
    p.add_argument("--n", type=int, required=True, help="matrix size")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--stream", type=int, default=0, help="stream index to draw from")
    p.add_argument("--method", choices=["gs", "qr"], default="gs",
                   help="gs: Gram-Schmidt reference construction; qr: factorization sampler")
    p.add_argument("--m", type=int, default=None, help="emit the upper-left m x m truncation")
    p.add_argument("--scaled", action="store_true", help="scale truncations by sqrt(n/m)")
    _add_common(p, formats=("json", "bin"))

    p = sub.add_parser("entries", help="entry moments and the entry-law KS test")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k-max", type=int, default=3, help="test E|U_11|^(2k) for k=1..k_max")
    p.add_argument("--samples", type=int, default=100_000)
    _add_mc(p)
    _add_common(p)

    p = sub.add_parser("traces", help="trace moments against their large-n limits")
    p.add_argument("--n", type=_int_list, required=True, help="size or comma list, e.g. 8,16,32")
    p.add_argument("--powers", type=_int_list, default=[1, 2, 3], help="trace powers l")
    p.add_argument("--k-max", type=int, default=2, help="moment orders k=1..k_max")
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--mixed", type=_mixed_queries, default=[],
                   help="mixed queries 'a1,a2:b1,b2;...' (powers of Tr U^i and conjugates)")
    p.add_argument("--method", choices=["gs", "qr"], default="qr")
    _add_mc(p)
    _add_common(p)

    p = sub.add_parser("eigenpowers", help="uniformity/independence of eigenvalue powers")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True, help="power; the theorem needs m > n")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--allow-low-power", action="store_true",
                   help="run m <= n anyway, reporting without asserting")
    p.add_argument("--method", choices=["gs", "qr"], default="qr")
    _add_mc(p)
    _add_common(p)

    p = sub.add_parser("truncate", help="truncation ensembles against their limit law")
    p.add_argument("--n", type=_int_list, required=True,
                   help="ambient size; a comma list runs the convergence comparison")
    p.add_argument("--m", type=int, required=True, help="kept block size")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--unscaled", action="store_true", help="report the unscaled block")
    _add_mc(p)
    _add_common(p)

    p = sub.add_parser("density", help="evaluate eigenvalue densities and the entry CDF")
    p.add_argument("--kind", choices=["weyl", "truncated", "ginibre", "entry_cdf"], required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--angles", type=_angle_tuples, default=None,
                   help="weyl: angle tuples 'a1,a2;a1,a2'")
    p.add_argument("--points", type=_point_tuples, default=None,
                   help="complex tuples 're,im re,im;...' (one group per evaluation)")
    p.add_argument("--x", type=_float_list, default=None, help="entry_cdf: evaluation points")
    _add_common(p)

    p = sub.add_parser("formulas", help="tabulate the closed-form moment values")
    p.add_argument("--n", type=_int_list, default=[2, 4, 8, 16, 32])
    p.add_argument("--k-max", type=int, default=3)
    p.add_argument("--powers", type=_int_list, default=[1, 2, 3])
    _add_common(p)

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--suite", choices=["full"], default="full")
    p.add_argument("--samples", type=int, default=100_000,
                   help="base sample count; the pinned criterion counts scale with it")
    p.add_argument("--method", choices=["gs", "qr"], default="qr")
    _add_mc(p)
    _add_common(p)

    p = sub.add_parser("serve", help="run the HTTP service under uvicorn")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("HAARLAB_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"HAARLAB_SEED must be an integer, got {env!r}")
    return 0


def _call(endpoint: str, payload: dict, server):
    if server is None:
        from .service import app

        async def go():
            transport = httpx.ASGITransport(app=app)
            async with httpx.AsyncClient(transport=transport, base_url="http://haarlab",
                                         timeout=None) as client:
                return await client.post(endpoint, json=payload)

        response = asyncio.run(go())
    else:
        with httpx.Client(base_url=server, timeout=None) as client:
            response = client.post(endpoint, json=payload)
    if response.status_code in (400, 422):
        raise UsageError(_error_detail(response))
    if response.status_code != 200:
        raise RuntimeError(f"service returned {response.status_code}: {response.text[:500]}")
    return response.json()


def _error_detail(response) -> str:
    try:
        detail = response.json().get("detail")
    except Exception:
        detail = None
    return str(detail) if detail is not None else response.text[:500]


def _write(data, output):
    if isinstance(data, bytes):
        if output is None:
            sys.stdout.buffer.write(data)
        else:
            with open(output, "wb") as fh:
                fh.write(data)
    else:
        if output is None:
            sys.stdout.write(data)
        else:
            with open(output, "w") as fh:
                fh.write(data)


def _experiment_output(data: dict, fmt: str, output) -> int:
    if fmt == "csv":
        _write(serialize.reports_csv(data["reports"]), output)
    else:
        _write(serialize.canonical_json(data) + "\n", output)
    print(f"{data['name']}: {'PASS' if data['passed'] else 'FAIL'}", file=sys.stderr)
    return EXIT_OK if data["passed"] else EXIT_STAT_FAIL


def _density_csv(data: dict) -> str:
    if data.get("cdf") is not None:
        lines = ["x,value"]
        for row in data["cdf"]:
            lines.append(f"{serialize.format_float(row['x'])},{serialize.format_float(row['value'])}")
        return "\n".join(lines) + "\n"
    pts = [
        DensityPoint(
            points=tuple(complex(re_, im_) for re_, im_ in row["points"]),
            value=row["value"],
            measure=Measure(row["measure"]),
            log_value=row["log_value"] if row["log_value"] is not None else float("-inf"),
        )
        for row in data["points"]
    ]
    return serialize.density_csv(pts)


def _run(args) -> int:
    cmd = args.command
    if cmd == "serve":
        import uvicorn

        from .service import app

        uvicorn.run(app, host=args.host, port=args.port)
        return EXIT_OK

    seed = _resolve_seed(args)

    if cmd == "sample":
        payload = {"n": args.n, "count": args.count, "seed": seed, "stream": args.stream,
                   "method": args.method, "m": args.m, "scaled": args.scaled}
        data = _call("/api/sample", payload, args.server)
        if args.format == "bin":
            mats = [serialize.matrix_from_dict(m) for m in data["matrices"]]
            _write(serialize.matrices_to_binary(mats), args.output)
        else:
            _write(serialize.canonical_json(data) + "\n", args.output)
        return EXIT_OK

    if cmd == "entries":
        payload = {"n": args.n, "samples": args.samples,
                   "k_list": list(range(1, args.k_max + 1)), "seed": seed,
                   "streams": args.streams, "workers": args.workers}
        return _experiment_output(_call("/api/entries", payload, args.server),
                                  args.format, args.output)

    if cmd == "traces":
        payload = {"n_list": args.n, "samples": args.samples, "powers": args.powers,
                   "k_max": args.k_max, "mixed": args.mixed, "seed": seed,
                   "streams": args.streams, "workers": args.workers, "method": args.method}
        return _experiment_output(_call("/api/traces", payload, args.server),
                                  args.format, args.output)

    if cmd == "eigenpowers":
        payload = {"n": args.n, "m": args.m, "samples": args.samples, "seed": seed,
                   "streams": args.streams, "workers": args.workers,
                   "allow_low_power": args.allow_low_power, "method": args.method}
        return _experiment_output(_call("/api/eigenpowers", payload, args.server),
                                  args.format, args.output)

    if cmd == "truncate":
        payload = {"n_list": args.n, "m": args.m, "samples": args.samples,
                   "scaled": not args.unscaled, "seed": seed,
                   "streams": args.streams, "workers": args.workers}
        return _experiment_output(_call("/api/truncate", payload, args.server),
                                  args.format, args.output)

    if cmd == "density":
        payload = {"kind": args.kind, "n": args.n, "m": args.m, "angles": args.angles,
                   "points": args.points, "x": args.x}
        data = _call("/api/density", payload, args.server)
        if args.format == "csv":
            _write(_density_csv(data), args.output)
        else:
            _write(serialize.canonical_json(data) + "\n", args.output)
        return EXIT_OK

    if cmd == "formulas":
        payload = {"ns": args.n, "ks": list(range(0, args.k_max + 1)), "ls": args.powers}
        data = _call("/api/formulas", payload, args.server)
        if args.format == "csv":
            rows = [(r["n"], r["k"], r["l"], r["value"], r["kind"]) for r in data["rows"]]
            _write(serialize.moments_csv(rows), args.output)
        else:
            _write(serialize.canonical_json(data) + "\n", args.output)
        return EXIT_OK

    if cmd == "verify":
        payload = {"suite": args.suite, "seed": seed, "samples": args.samples,
                   "streams": args.streams, "workers": args.workers, "method": args.method}
        data = _call("/api/verify", payload, args.server)
        if args.format == "csv":
            reports = [r for crit in data["criteria"] for r in crit["reports"]]
            _write(serialize.reports_csv(reports), args.output)
        else:
            _write(serialize.canonical_json(data) + "\n", args.output)
        for crit in data["criteria"]:
            print(f"criterion {crit['name']}: {'PASS' if crit['passed'] else 'FAIL'}",
                  file=sys.stderr)
        print(f"suite: {'PASS' if data['passed'] else 'FAIL'}", file=sys.stderr)
        return EXIT_OK if data["passed"] else EXIT_STAT_FAIL

    raise UsageError(f"unknown command {cmd!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except UsageError as exc:
        print(f"haarlab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (httpx.HTTPError, RuntimeError, OSError, ValueError) as exc:
        print(f"haarlab: {exc}", file=sys.stderr)
        return EXIT_EXEC


if __name__ == "__main__":
    sys.exit(main())
