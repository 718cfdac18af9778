#!/usr/bin/env python3
"""Solve an MPS or LP file with HiGHS and write `name value` lines.

Usage:
    highs_solve.py MODEL SOLUTION [--warmstart FILE] [--gap G]
                   [--timelimit SECONDS] [--options "key=value ..."]

Exit status 0 when a feasible MIP solution was written, 1 otherwise.
"""

import argparse
import sys

import highspy


def parse_value(text):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    return text


def read_values(path):
    values = {}
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            name, value = line.split()
            values[name] = float(value)
    return values


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("model")
    ap.add_argument("solution")
    ap.add_argument("--warmstart")
    ap.add_argument("--gap", type=float, default=0.05)
    ap.add_argument("--timelimit", type=float)
    ap.add_argument("--options", default="")
    args = ap.parse_args()

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", args.gap)
    if args.timelimit:
        h.setOptionValue("time_limit", args.timelimit)
    for item in args.options.split():
        key, _, value = item.partition("=")
        h.setOptionValue(key, parse_value(value))

    if h.readModel(args.model) != highspy.HighsStatus.kOk:
        print(f"cannot read {args.model}", file=sys.stderr)
        return 1
    lp = h.getLp()
    names = list(lp.col_names_)

    if args.warmstart:
        start = read_values(args.warmstart)
        sol = highspy.HighsSolution()
        sol.col_value = [start.get(n, 0.0) for n in names]
        sol.value_valid = True
        h.setSolution(sol)

    h.run()
    status = h.getModelStatus()
    info = h.getInfo()
    if info.primal_solution_status != 2:
        print(f"no feasible solution: {h.modelStatusToString(status)}", file=sys.stderr)
        return 1
    values = h.getSolution().col_value
    with open(args.solution, "w") as f:
        for name, value in zip(names, values):
            f.write(f"{name} {value!r}\n")
    print(f"{h.modelStatusToString(status)} objective {info.objective_function_value!r}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
