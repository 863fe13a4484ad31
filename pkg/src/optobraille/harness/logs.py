"""Append-only JSONL logs and the trajectory/command file schemas.

Trajectory rows: {"t": s, "x": mm, "y": mm, "kind": command}
Command rows:    {"t", "kind", "strength", "d1", "d2", "d3", "tipX", "tipY"}

CSV mirrors of the trajectory schema round-trip losslessly (repr floats).
"""

from __future__ import annotations

import json
from pathlib import Path

from optobraille.sim.experiment import CommandEvent, TrajectoryLog


def dump_jsonl(records, path) -> None:
    with open(path, "w") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def load_jsonl(path) -> list[dict]:
    out = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            out.append(json.loads(line))
    return out


def trajectory_records(log: TrajectoryLog) -> list[dict]:
    return [{"t": t, "x": x, "y": y, "kind": kind} for t, x, y, kind in log.samples]


def command_records(log: TrajectoryLog) -> list[dict]:
    return [{"t": ev.t, "kind": ev.kind, "strength": ev.strength,
             "d1": ev.d1, "d2": ev.d2, "d3": ev.d3,
             "tipX": ev.tip_x, "tipY": ev.tip_y} for ev in log.commands]


def save_trajectory(log: TrajectoryLog, path) -> None:
    payload = {"metadata": log.metadata}
    with open(path, "w") as fh:
        fh.write(json.dumps(payload, sort_keys=True) + "\n")
        for record in trajectory_records(log):
            fh.write(json.dumps(record, sort_keys=True) + "\n")
        for record in command_records(log):
            fh.write(json.dumps({"command": record}, sort_keys=True) + "\n")


def load_trajectory(path) -> TrajectoryLog:
    metadata: dict = {}
    samples = []
    commands = []
    for record in load_jsonl(path):
        if "metadata" in record:
            metadata = record["metadata"]
        elif "command" in record:
            c = record["command"]
            commands.append(CommandEvent(t=c["t"], kind=c["kind"], strength=c["strength"],
                                         d1=c["d1"], d2=c["d2"], d3=c["d3"],
                                         tip_x=c["tipX"], tip_y=c["tipY"]))
        else:
            samples.append((record["t"], record["x"], record["y"], record["kind"]))
    return TrajectoryLog(samples=samples, commands=commands, metadata=metadata)


def save_trajectory_csv(log: TrajectoryLog, path) -> None:
    with open(path, "w") as fh:
        fh.write("t,x,y,kind\n")
        for t, x, y, kind in log.samples:
            fh.write(f"{t!r},{x!r},{y!r},{kind}\n")


def load_trajectory_csv(path, metadata: dict | None = None) -> TrajectoryLog:
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0] != "t,x,y,kind":
        raise ValueError("not a trajectory CSV (expected header t,x,y,kind)")
    samples = []
    for line in lines[1:]:
        t, x, y, kind = line.split(",")
        samples.append((float(t), float(x), float(y), kind))
    return TrajectoryLog(samples=samples, commands=[], metadata=metadata or {})
