"""Command-line client for the solver service.

By default the bundled ASGI app runs in-process, so single solves and
benchmark runs need no server at all.  --server points the same
commands at a remote instance; --serve starts one.
"""

from __future__ import annotations

import argparse
import sys

METHOD_CHOICES = ["huang1", "mod-huang1", "huang2", "mod-huang2", "ilu"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlabs",
        description="Row-projection solvers for dense nonlinear systems.",
    )
    parser.add_argument("--problem", help="problem slug; see --list-problems")
    parser.add_argument("--n", type=int, default=None, help="problem dimension")
    parser.add_argument("--scale", type=float, default=1.0, help="start point scaling")
    parser.add_argument("--method", choices=METHOD_CHOICES, default="mod-huang2")
    parser.add_argument("--line-search", choices=["on", "off"], default="off")
    parser.add_argument("--precision", type=int, choices=[32, 64], default=64)
    parser.add_argument("--eps", type=float, default=None, help="residual target")
    parser.add_argument("--t", type=float, default=None, help="dependence tolerance")
    parser.add_argument("--tol", type=float, default=None, help="relative step threshold")
    parser.add_argument("--ns", type=int, default=None, help="stagnation window")
    parser.add_argument("--ndiv", type=int, default=None, help="divergence window")
    parser.add_argument("--itmax", type=int, default=None, help="iteration cap")
    parser.add_argument("--nhalf", type=int, default=None, help="line search halvings")
    parser.add_argument("--tol-mode", choices=["abs", "row"], default=None,
                        help="dependence test scaling")
    parser.add_argument("--format", choices=["markdown", "csv"], default="markdown")
    parser.add_argument("--grid", action="store_true",
                        help="run the full benchmark matrix")
    parser.add_argument("--check", action="store_true",
                        help="run the matrix against the expected results; "
                             "nonzero exit on any mismatch")
    parser.add_argument("--list-problems", action="store_true")
    parser.add_argument("--server", default=None,
                        help="URL of a running service (default: in-process)")
    parser.add_argument("--serve", action="store_true", help="start the HTTP service")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    return parser


def _client(server: str | None):
    if server:
        import httpx

        return httpx.Client(base_url=server, timeout=600.0)
    import warnings

    with warnings.catch_warnings():
        # the installed starlette deprecates its own test client import;
        # not actionable here and not worth a line of stderr per run
        warnings.filterwarnings("ignore", message=r"Using `httpx` with `starlette")
        from fastapi.testclient import TestClient

    from .service.app import app

    return TestClient(app)


def _options(args) -> dict:
    options = {"precision": args.precision}
    for flag, name in (
        ("t", "t"),
        ("eps", "eps"),
        ("tol", "tol"),
        ("ns", "n_s"),
        ("ndiv", "n_div"),
        ("itmax", "itmax"),
        ("nhalf", "n_half"),
    ):
        value = getattr(args, flag)
        if value is not None:
            options[name] = value
    if args.tol_mode is not None:
        options["tol_mode"] = {"abs": "absolute", "row": "row_scaled"}[args.tol_mode]
    return options


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.serve:
        import uvicorn

        from .service.app import app

        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    with _client(args.server) as client:
        if args.check:
            response = client.post("/check", json={})
            response.raise_for_status()
            body = response.json()
            print("\n".join(body["lines"]))
            matched = body["checked"] - body["failures"]
            print(f"{matched}/{body['checked']} reference rows matched")
            return 0 if body["passed"] else 1

        if args.list_problems:
            response = client.get("/problems")
            response.raise_for_status()
            for info in response.json():
                print(f"{info['name']}  (default n={info['default_n']}, {info['admissible']})")
            return 0

        options = _options(args)
        if args.grid:
            payload = {"format": args.format, "precision": args.precision}
            extra = {k: v for k, v in options.items() if k != "precision"}
            if extra:
                payload["options"] = extra
            response = client.post("/grid", json=payload)
            response.raise_for_status()
            print(response.json()["table"], end="")
            return 0

        if not args.problem:
            parser.error("--problem is required unless --grid, --check, "
                         "--list-problems or --serve is given")
        spec = {
            "problem": args.problem,
            "n": args.n,
            "scale": args.scale,
            "method": args.method,
            "line_search": args.line_search == "on",
            "options": options,
        }
        response = client.post("/grid", json={"specs": [spec], "format": args.format})
        if response.status_code != 200:
            print(response.text, file=sys.stderr)
            return 1
        body = response.json()
        print(body["table"], end="")
        if any(row["status"] == "(invalid)" for row in body["rows"]):
            return 1
        return 0


if __name__ == "__main__":
    sys.exit(main())
