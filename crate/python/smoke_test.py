#!/usr/bin/env python3
"""Smoke test for the dsh_python extension module.

Build the module first, then run this script from anywhere:

    cargo build --release -p dsh-python
    python3 python/smoke_test.py
"""

import importlib.util
import json
import math
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]


def load_module():
    candidates = [
        REPO / "target" / "release" / "libdsh_python.so",
        REPO / "target" / "debug" / "libdsh_python.so",
    ]
    for path in candidates:
        if path.exists():
            spec = importlib.util.spec_from_file_location("dsh_python", path)
            module = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(module)
            return module
    sys.exit(
        "dsh_python extension not found; run `cargo build --release -p dsh-python` first"
    )


def main():
    dsh = load_module()
    checks = 0

    def check(ok, what):
        nonlocal checks
        checks += 1
        if not ok:
            sys.exit(f"FAILED: {what}")

    scenario = dsh.Scenario.load(str(REPO / "scenarios" / "mil.cfg"))
    check(scenario.mode == "step", "mil.cfg starts in step mode")
    check(scenario.queue_start == 5200.0, "queue start")
    check(scenario.queue_end == 5700.0, "queue end")
    check(scenario.queue_speed == 5.0, "queue speed")
    check("queue=[5200, 5700]" in repr(scenario), "scenario repr")

    # Config text round-trips.
    again = dsh.Scenario.parse(scenario.to_text())
    check(again.to_text() == scenario.to_text(), "config text round-trip")

    # Mode override plus basic trace shape.
    trace, metrics = dsh.run_scenario(scenario, mode="single-sigmoid")
    check(len(trace) > 10_000, "trace has one sample per step")
    check(len(trace.speed) == len(trace), "speed column length")
    check(trace.to_csv().splitlines()[0]
          == "t,distance,speed,accel,v_ref,advisory_delivered,fuel_cum",
          "csv header")
    in_queue = [v for d, v in zip(trace.distance, trace.speed) if 5250 <= d <= 5700]
    check(in_queue and max(abs(v - 5.0) for v in in_queue) <= 0.5,
          "vehicle holds queue speed through the queue")
    check(abs(trace.speed[-1] - 20.0) <= 0.5, "vehicle recovers to the limit")

    # Metrics surface matches the JSON the CLI prints.
    d = metrics.as_dict()
    check(set(d) == {"peak_decel", "rms_jerk", "travel_time", "fuel_total",
                     "tracking_rmse"}, "metrics dict keys")
    check(json.loads(metrics.to_json()) == d, "metrics JSON equals dict")
    check(d["peak_decel"] > 0.0 and d["fuel_total"] > 0.0, "metrics are positive")

    # Setting an invalid dt raises and leaves the scenario untouched.
    try:
        scenario.dt = 0.5
        sys.exit("FAILED: dt=0.5 should be rejected")
    except ValueError:
        pass
    check(scenario.dt == 0.01, "dt unchanged after rejected assignment")

    # Full comparison: presentation order and the no-dsh braking spike.
    runs = dsh.compare_modes(scenario)
    check([m for m, _, _ in runs] == ["no-dsh", "step", "single-sigmoid",
                                      "step-sigmoid"], "comparison order")
    by_mode = {m: metrics for m, _, metrics in runs}
    check(by_mode["no-dsh"].peak_decel == 3.0, "no-dsh brakes at the hard limit")
    for m in ("step", "single-sigmoid", "step-sigmoid"):
        check(by_mode[m].peak_decel < 3.0, f"{m} brakes more gently")

    # Advisory curve: the single sigmoid crosses the midpoint speed exactly
    # halfway down the approach.
    entry = 4201.0
    mid = (entry + scenario.queue_start) / 2.0
    curve = dsh.advisory_curve(scenario, "single-sigmoid", entry, 20.0,
                               [entry, mid, scenario.queue_start + 1.0])
    check(abs(curve[0] - 20.0) < 0.3, "advisory starts near the entry speed")
    check(math.isclose(curve[1], 12.5, abs_tol=1e-9), "advisory midpoint speed")
    check(curve[2] == 5.0, "advisory holds queue speed inside the queue")
    try:
        dsh.advisory_curve(scenario, "no-dsh", entry, 20.0, [entry])
        sys.exit("FAILED: no-dsh advisory_curve should raise")
    except ValueError:
        pass

    # Frame codec round-trip.
    frame = dsh.encode_advisory(scenario, msg_id=7, timestamp_ms=1250)
    check(isinstance(frame, bytes) and len(frame) == dsh.FRAME_LEN, "frame size")
    fields = dsh.decode_advisory(frame)
    check(fields["msg_id"] == 7 and fields["timestamp_ms"] == 1250, "frame header")
    check(fields["queue_start_m"] == 5200.0 and fields["queue_end_m"] == 5700.0,
          "frame queue extent")
    check(fields["queue_speed_mps"] == 5.0 and fields["comm_range_m"] == 1000.0,
          "frame advisory fields")
    try:
        dsh.decode_advisory(b"\x00" * 35)
        sys.exit("FAILED: short frame should raise")
    except ValueError as e:
        check("LengthError" in str(e), "short frame error names the length")

    print(f"smoke test passed ({checks} checks)")


if __name__ == "__main__":
    main()
