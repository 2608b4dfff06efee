"""Command-line front end.

Every subcommand is a thin client of the HTTP service; by default the
app runs in-process, `--server` points the same calls at a remote
instance.  Commands that write artifacts drop a manifest next to each
primary output so a directory of results stays traceable.

Exit codes: 0 success, 1 a validation or assertion failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
import warnings
from pathlib import Path

import httpx

from . import __version__

ENV_OUTPUT_DIR = "ADC_OUTPUT_DIR"

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


class InputError(Exception):
    """Anything wrong with flags, files or config documents."""


def _make_client(server: str | None):
    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=None)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient
    from .service.app import create_app
    return TestClient(create_app())


def _call(client, path: str, payload: dict) -> dict:
    reply = client.post(path, json=payload)
    if reply.status_code == 422:
        detail = reply.json().get("detail")
        if not isinstance(detail, str):
            detail = json.dumps(detail)
        raise InputError(detail)
    reply.raise_for_status()
    return reply.json()


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}")


def _read_json(path: str) -> dict:
    text = _read_text(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise InputError(f"{path} must hold a JSON object")
    return doc


def _output_dir(args) -> Path:
    root = args.output_dir or os.environ.get(ENV_OUTPUT_DIR) or "."
    path = Path(root)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _artifact_path(args, default_name: str) -> Path:
    if getattr(args, "out", None):
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        return path
    return _output_dir(args) / default_name


def write_manifest(artifact: Path, command: str, config_path,
                   seed, outputs: list[Path], started: float) -> Path:
    """One manifest per primary artifact, sitting next to it."""
    doc = {
        "command": command,
        "config_path": str(config_path) if config_path else None,
        "seed": seed,
        "tool_version": __version__,
        "outputs": [str(p) for p in outputs],
        "wall_clock_s": round(time.time() - started, 3),
    }
    path = artifact.parent / (artifact.stem + ".manifest.json")
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


# --- subcommands ----------------------------------------------------------

def _grid_lines(m: int, side: int, slots: list[int]) -> list[str]:
    chosen = set(slots)
    lines = []
    for r in range(side):
        cells = []
        for c in range(side):
            s = r * side + c
            if s >= m:
                cells.append(" ")
            else:
                cells.append("#" if s in chosen else ".")
        lines.append(" ".join(cells).rstrip())
    return lines


def cmd_qs(args, client) -> int:
    payload = {"m": args.m, "anchor": args.anchor,
               "verify_closure": args.verify_closure}
    if args.demand is not None:
        payload["demand"] = args.demand
    out = _call(client, "/qs", payload)
    if args.json:
        print(json.dumps(out, sort_keys=True))
        return EXIT_OK
    quorum = out["quorum"]
    print(f"period m={out['m']} grid {out['side']}x{out['side']}"
          + (f" demand {out['demand']}" if out["demand"] is not None else ""))
    print(f"quorum: anchor {quorum['anchor']}, {quorum['rows']} row(s), "
          f"{quorum['cardinality']} slots")
    for line in _grid_lines(out["m"], out["side"], quorum["slots"]):
        print("  " + line)
    print("slots: " + ",".join(str(s) for s in quorum["slots"]))
    load = out["load"]
    print(f"load: max {load['max_load']:.4f}, access frequency "
          f"{load['max_access_frequency']:.4f}, floor {load['floor']:.4f}")
    if out["closure"] is not None:
        c = out["closure"]
        verdict = "closure holds" if c["ok"] else f"closure FAILS at {c['witness']}"
        print(f"{verdict} ({c['quorums']} quorums x {c['shifts']} shifts)")
        if not c["ok"]:
            return EXIT_FAILED
    return EXIT_OK


def cmd_schedule(args, client) -> int:
    started = time.time()
    payload = {"selection": args.selection, "k_retries": args.k_retries,
               "seed": args.seed}
    if args.m is not None:
        payload["m"] = args.m
    text = _read_text(args.topology)
    if args.topology.endswith(".json"):
        payload["topology"] = json.loads(text)
    else:
        payload["topology_text"] = text
    out = _call(client, "/schedule", payload)
    artifact = _artifact_path(args, "schedule.txt")
    artifact.write_text(out["schedule_text"])
    manifest = write_manifest(artifact, "schedule", args.topology, args.seed,
                              [artifact], started)
    if args.json:
        slim = {k: out[k] for k in ("m", "phi", "nodes", "sink", "validation")}
        slim["schedule_path"] = str(artifact)
        print(json.dumps(slim, sort_keys=True))
    else:
        print(f"schedule for {out['nodes']} nodes: m={out['m']} "
              f"phi={out['phi']} sink={out['sink']} -> {artifact}")
        print(f"manifest: {manifest}")
    verdict = out["validation"]
    if not verdict["ok"]:
        for line in verdict["violations"][:10]:
            print(f"violation: {line}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def cmd_simulate(args, client) -> int:
    started = time.time()
    config = _read_json(args.config)
    out = _call(client, "/simulate", {"config": config})
    report = out["report"]
    artifact = _artifact_path(args, "report.json")
    artifact.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    write_manifest(artifact, "simulate", args.config, report.get("seed"),
                   [artifact], started)
    if args.json:
        print(json.dumps(report, sort_keys=True))
    else:
        print(f"{report['mac']} run, mode {report['mode']}, seed "
              f"{report['seed']}: generated {report['generated']} "
              f"delivered {report['delivered']} "
              f"throughput {report['throughput']:.3f}/s prr {report['prr']:.3f}")
        if report.get("aggregation_delay") is not None:
            print(f"aggregation delay {report['aggregation_delay']} slots "
                  f"(complete={report['aggregation_complete']})")
        print(f"report: {artifact}")
    return EXIT_OK


def cmd_sweep(args, client) -> int:
    started = time.time()
    matrix = _read_json(args.config)
    out = _call(client, "/sweep", {"matrix": matrix, "jobs": args.jobs})
    artifact = _artifact_path(args, "sweep.csv")
    artifact.write_text(out["csv"])
    write_manifest(artifact, "sweep", args.config, matrix.get("seeds"),
                   [artifact], started)
    if args.json:
        print(json.dumps({"rows": len(out["rows"]), "csv_path": str(artifact),
                          "trends": out["trends"]}, sort_keys=True))
    else:
        print(f"{len(out['rows'])} runs -> {artifact}")
        for name, value in sorted(out["trends"].items()):
            print(f"trend {name}: {value}")
    return EXIT_OK


def cmd_verify(args, client) -> int:
    out = _call(client, "/verify", {"fast": args.fast})
    if args.json:
        print(json.dumps(out, sort_keys=True))
    else:
        for check in out["checks"]:
            mark = "PASS" if check["passed"] else "FAIL"
            print(f"{mark} {check['name']:<26} {check['cases']:>8} cases "
                  f"{check['elapsed_s']:>7.2f}s  {check['detail']}")
        print(f"{'all checks pass' if out['ok'] else 'CHECKS FAILED'} "
              f"in {out['elapsed_s']:.1f}s")
    return EXIT_OK if out["ok"] else EXIT_FAILED


# --- argument wiring ------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adc",
        description="Quorum duty-cycle schedules, simulations and checks")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    parser.add_argument("--server", metavar="URL",
                        help="talk to a running service instead of in-process")
    parser.add_argument("--output-dir", metavar="DIR",
                        help=f"artifact directory (default ${ENV_OUTPUT_DIR} "
                             "or the working directory)")
    sub = parser.add_subparsers(dest="command", required=True)

    qs = sub.add_parser("qs", help="build a quorum and inspect it")
    qs.add_argument("--m", type=int, required=True, help="slots per period")
    qs.add_argument("--demand", type=float,
                    help="traffic demand as a fraction of the channel rate")
    qs.add_argument("--anchor", type=int, default=1)
    qs.add_argument("--verify-closure", action="store_true",
                    help="exhaustively check every pair under every shift")
    qs.add_argument("--json", action="store_true")
    qs.set_defaults(fn=cmd_qs)

    sched = sub.add_parser("schedule", help="schedule a topology file")
    sched.add_argument("topology",
                       help="edge list, or a .json topology spec")
    sched.add_argument("--m", type=int)
    sched.add_argument("--selection",
                       choices=["determinate", "random"],
                       default="determinate")
    sched.add_argument("--k-retries", type=int, default=1)
    sched.add_argument("--seed", type=int, default=0)
    sched.add_argument("--out", metavar="PATH")
    sched.add_argument("--json", action="store_true")
    sched.set_defaults(fn=cmd_schedule)

    sim = sub.add_parser("simulate", help="run one configured simulation")
    sim.add_argument("config", help="simulation config JSON")
    sim.add_argument("--out", metavar="PATH")
    sim.add_argument("--json", action="store_true")
    sim.set_defaults(fn=cmd_simulate)

    sweep = sub.add_parser("sweep", help="run a comparison matrix")
    sweep.add_argument("config", help="sweep matrix JSON")
    sweep.add_argument("--jobs", type=int, default=1)
    sweep.add_argument("--out", metavar="PATH")
    sweep.add_argument("--json", action="store_true")
    sweep.set_defaults(fn=cmd_sweep)

    verify = sub.add_parser("verify", help="run the property suite")
    verify.add_argument("--fast", action="store_true",
                        help="trimmed trial counts for a quick look")
    verify.add_argument("--json", action="store_true")
    verify.set_defaults(fn=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    client = _make_client(args.server)
    try:
        return args.fn(args, client)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except httpx.HTTPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    finally:
        client.close()


if __name__ == "__main__":
    sys.exit(main())
