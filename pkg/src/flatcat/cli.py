"""Command-line front end: a thin client over the service handlers.

Subcommands mirror the HTTP endpoints one-to-one.  By default handlers run
in-process; with --server URL the same JSON request is POSTed to a running
service instead.  Exit codes: 0 pass, 1 mathematical failure, 2 input
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from .service import handlers


def _dump(report: dict, json_out: Optional[str]) -> None:
    text = json.dumps(report, sort_keys=True, indent=1,
                      separators=(",", ": "))
    if json_out:
        with open(json_out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)


def _load(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        raise SystemExit(2)


def _post(server: str, endpoint: str, payload: dict) -> tuple:
    import urllib.request

    req = urllib.request.Request(
        server.rstrip("/") + endpoint,
        data=json.dumps(payload).encode("utf-8"),
        headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req) as resp:
            body = json.loads(resp.read().decode("utf-8"))
    except Exception as exc:  # connection or HTTP error
        print(f"server error: {exc}", file=sys.stderr)
        raise SystemExit(2)
    return body["exit_code"], body["report"]


def _dispatch(args, endpoint: str, payload: dict, local_fn, *local_args,
              **local_kwargs) -> int:
    if args.server:
        code, report = _post(args.server, endpoint, payload)
    else:
        try:
            code, report = local_fn(*local_args, **local_kwargs)
        except handlers.InputError as exc:
            print(f"input error: {exc}", file=sys.stderr)
            return 2
    _dump(report, args.json_out)
    return code


def main(argv=None) -> int:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--server", default=None,
                        help="POST to a running service instead of "
                             "computing in-process")
    common.add_argument("--json-out", default=None,
                        help="also write the JSON report to this file")
    parser = argparse.ArgumentParser(
        prog="flatcat",
        description="Exact arc-system A-infinity categories, flat-surface "
                    "geodesic counts, and refined DT invariants.",
        parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    def sub_parser(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    p = sub_parser("identities", help="appendix identity suite")
    p.add_argument("--order", type=int, default=8)

    p = sub_parser("quiver-dt", help="DT spectra of the small quivers")
    p.add_argument("--order", type=int, default=6)

    p = sub_parser("ainfty-verify",
                   help="verify the structure equations of an arc system")
    p.add_argument("arcsys", help="arc-system JSON file")
    p.add_argument("--max-n", type=int, default=6)
    p.add_argument("--eta-cap", type=int, default=3)
    p.add_argument("--max-len", type=int, default=12)
    p.add_argument("--threads", type=int, default=1)

    p = sub_parser("ext", help="Ext table and CY pairing of two arcs")
    p.add_argument("arcsys")
    p.add_argument("arc_x", type=int)
    p.add_argument("arc_y", type=int)

    p = sub_parser("sc-enum", help="enumerate saddle connections")
    p.add_argument("surface", help="surface JSON file")
    p.add_argument("--lmax", default=None, help="rational length bound")
    p.add_argument("--lmax2", default=None,
                   help="rational squared-length bound")
    p.add_argument("--direction", default=None,
                   help="exact slope filter (rational or 'inf')")

    p = sub_parser("dt", help="geodesic counts and DT invariants")
    p.add_argument("surface")
    p.add_argument("--lmax", default=None)
    p.add_argument("--lmax2", default=None)

    p = sub_parser("wallcross",
                   help="compare quantum-torus products of two deformed "
                        "surfaces")
    p.add_argument("surface_a")
    p.add_argument("surface_b")
    p.add_argument("--lmax", default=None)
    p.add_argument("--lmax2", default=None)
    p.add_argument("--order", type=int, default=6)
    p.add_argument("--sector", default=None,
                   help="JSON [[xr,xc],[yr,yc]] pair of direction vectors")
    p.add_argument("--weights", default=None,
                   help="JSON list of integer weights")

    args = parser.parse_args(argv)

    if args.command == "identities":
        return _dispatch(args, "/identities", {"order": args.order},
                         handlers.run_identities, args.order)
    if args.command == "quiver-dt":
        return _dispatch(args, "/quiver-dt", {"order": args.order},
                         handlers.run_quiver_dt, args.order)
    if args.command == "ainfty-verify":
        spec = _load(args.arcsys)
        payload = {"arc_system": spec, "max_n": args.max_n,
                   "eta_cap": args.eta_cap, "max_len": args.max_len,
                   "threads": args.threads}
        return _dispatch(args, "/ainfty-verify", payload,
                         handlers.run_ainfty_verify, spec, args.max_n,
                         args.eta_cap, args.max_len, args.threads)
    if args.command == "ext":
        spec = _load(args.arcsys)
        payload = {"arc_system": spec, "arc_x": args.arc_x,
                   "arc_y": args.arc_y}
        return _dispatch(args, "/ext", payload, handlers.run_ext, spec,
                         args.arc_x, args.arc_y)
    if args.command == "sc-enum":
        spec = _load(args.surface)
        payload = {"surface": spec, "lmax": args.lmax, "lmax2": args.lmax2,
                   "direction": args.direction}
        return _dispatch(args, "/sc-enum", payload, handlers.run_sc_enum,
                         spec, args.lmax, args.lmax2, args.direction)
    if args.command == "dt":
        spec = _load(args.surface)
        payload = {"surface": spec, "lmax": args.lmax, "lmax2": args.lmax2}
        return _dispatch(args, "/dt", payload, handlers.run_dt, spec,
                         args.lmax, args.lmax2)
    if args.command == "wallcross":
        spec_a = _load(args.surface_a)
        spec_b = _load(args.surface_b)
        sector = json.loads(args.sector) if args.sector else None
        weights = json.loads(args.weights) if args.weights else None
        payload = {"surface_a": spec_a, "surface_b": spec_b,
                   "lmax": args.lmax, "lmax2": args.lmax2,
                   "order": args.order, "sector": sector,
                   "weights": weights}
        return _dispatch(args, "/wallcross", payload,
                         handlers.run_wallcross, spec_a, spec_b,
                         args.lmax, args.lmax2, args.order, sector,
                         weights)
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
