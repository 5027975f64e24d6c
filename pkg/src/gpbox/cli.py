"""Thin command-line client for the service.

Every verb marshals JSON to the HTTP API; by default the app is mounted
in-process (no socket), and --server points the same verbs at a remote
instance.  Configs are JSON files with the strict run schema; there are no
positional arguments beyond the verb and the config path.

Exit status is 0 iff every verdict in the response is PASS.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import httpx


def make_client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    # in-process: mount the ASGI app behind a synchronous httpx client
    from fastapi.testclient import TestClient

    from .service import app
    return TestClient(app)


def _die(resp: httpx.Response):
    try:
        detail = resp.json()
    except Exception:
        detail = resp.text
    print(f"error {resp.status_code}: {json.dumps(detail, indent=2)}",
          file=sys.stderr)
    sys.exit(2)


def _post_run(client: httpx.Client, config: dict) -> int:
    resp = client.post("/runs", json=config)
    if resp.status_code != 200:
        _die(resp)
    manifest = resp.json()
    print(json.dumps(manifest, indent=2))
    verdicts = manifest.get("verdicts", [])
    return 0 if all(v["verdict"] == "PASS" for v in verdicts) else 1


def _load_config(path: str) -> dict:
    return json.loads(Path(path).read_text())


def cmd_run(args, client) -> int:
    return _post_run(client, _load_config(args.config))


def cmd_accept(args, client) -> int:
    body = {"level": args.level}
    if args.criteria:
        body["criteria"] = [int(c) for c in args.criteria.split(",")]
    resp = client.post("/accept", json=body)
    if resp.status_code != 200:
        _die(resp)
    doc = resp.json()
    for c in doc["criteria"]:
        print(f"[{c['verdict']:>7}] criterion {c['id']:2d}  {c['name']}"
              f"  ({c['runtime_s']:.1f}s)")
    print("all pass:", doc["all_pass"])
    return 0 if doc["all_pass"] else 1


def cmd_symbols(args, client) -> int:
    if args.action == "list":
        resp = client.get("/symbols")
        if resp.status_code != 200:
            _die(resp)
        for s in resp.json()["symbols"]:
            print(f"{s['name']:20s} {s['kind']:10s} {s['note']}")
        return 0
    body = {"name": args.name, "xi1": json.loads(args.xi1),
            "xi2": json.loads(args.xi2)}
    if args.xi3:
        body["xi3"] = json.loads(args.xi3)
    resp = client.post("/symbols/eval", json=body)
    if resp.status_code != 200:
        _die(resp)
    print(json.dumps(resp.json(), indent=2))
    return 0


def cmd_xnorm(args, client) -> int:
    from .fieldio import field_to_json, load_field
    f = load_field(args.field)
    resp = client.post("/analysis/xnorm", json={"field": field_to_json(f),
                                                "t": args.t})
    if resp.status_code != 200:
        _die(resp)
    print(json.dumps(resp.json(), indent=2))
    return 0


def _kind_verb(kind: str):
    def cmd(args, client) -> int:
        config = _load_config(args.config)
        config["kind"] = kind
        return _post_run(client, config)
    return cmd


def cmd_normalform(args, client) -> int:
    kind = "normalform-check" if args.action == "check" else "normalform-invert"
    config = _load_config(args.config)
    config["kind"] = kind
    return _post_run(client, config)


def cmd_serve(args, client) -> int:
    import uvicorn
    uvicorn.run("gpbox.service:app", host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gpbox",
                                description="pseudo-spectral GP toolkit client")
    p.add_argument("--server", default=os.environ.get("GPBOX_SERVER"),
                   help="remote service URL (default: in-process app)")
    sub = p.add_subparsers(dest="verb", required=True)

    sp = sub.add_parser("run", help="execute a run config")
    sp.add_argument("config")
    sp.set_defaults(fn=cmd_run)

    sp = sub.add_parser("accept", help="run the acceptance battery")
    sp.add_argument("--level", choices=("fast", "full"), default="fast")
    sp.add_argument("--criteria", help="comma-separated criterion ids")
    sp.set_defaults(fn=cmd_accept)

    sp = sub.add_parser("symbols", help="registry access")
    ssub = sp.add_subparsers(dest="action", required=True)
    sl = ssub.add_parser("list")
    sl.set_defaults(fn=cmd_symbols, action="list")
    se = ssub.add_parser("eval")
    se.add_argument("--name", required=True)
    se.add_argument("--xi1", required=True, help="JSON list of points")
    se.add_argument("--xi2", required=True)
    se.add_argument("--xi3")
    se.set_defaults(fn=cmd_symbols, action="eval")

    sp = sub.add_parser("xnorm", help="X norm of a stored field")
    sp.add_argument("field")
    sp.add_argument("--t", type=float, default=0.0)
    sp.set_defaults(fn=cmd_xnorm)

    sp = sub.add_parser("normalform", help="identity residuals / inverse map")
    ssub = sp.add_subparsers(dest="action", required=True)
    for act in ("check", "invert"):
        sa = ssub.add_parser(act)
        sa.add_argument("config")
        sa.set_defaults(fn=cmd_normalform, action=act)

    for verb, kind in (("resonance-scan", "resonance-scan"),
                       ("decay-fit", "decay-fit"),
                       ("scatter-extract", "scatter-extract"),
                       ("sbil-harness", "sbil-harness"),
                       ("simulate", "simulate"),
                       ("boussinesq", "boussinesq"),
                       ("propagate-linear", "propagate-linear")):
        sp = sub.add_parser(verb, help=f"run a {kind} config")
        sp.add_argument("config")
        sp.set_defaults(fn=_kind_verb(kind))
    # `resonance scan <config>` per the documented verb shape
    sp = sub.add_parser("resonance")
    ssub = sp.add_subparsers(dest="action", required=True)
    sa = ssub.add_parser("scan")
    sa.add_argument("config")
    sa.set_defaults(fn=_kind_verb("resonance-scan"))

    sp = sub.add_parser("serve", help="run the HTTP service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8642)
    sp.set_defaults(fn=cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verb == "serve":
        return cmd_serve(args, None)
    with make_client(args.server) as client:
        return args.fn(args, client)


if __name__ == "__main__":
    sys.exit(main())
