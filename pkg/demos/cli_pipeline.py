"""Driving the obslab command line from a config file.

Writes an INI config describing a field and a certification run, invokes
the CLI the same way a shell would, and inspects the JSON and CSV
artifacts it leaves behind. Everything lands in ./demo_out.
"""

import json
import pathlib

from obslab import cli


def main():
    out = pathlib.Path("demo_out")
    out.mkdir(exist_ok=True)
    cfg = out / "run.ini"
    cfg.write_text(
        "[field]\n"
        "family = periodic-square\n"
        "dim = 2\n"
        "grid = 200\n"
        "period = 1.0\n"
        "delta = 0.3\n"
        "\n"
        "[certify]\n"
        "rho = 0.5\n"
        "lambdas = 2560000\n"
        "n_offsets = 16\n"
        "samples_per_unit = 16\n"
    )
    code = cli.main(["certify", "--config", str(cfg), "--out", str(out)])
    print(f"certify exit code: {code}")

    payload = json.loads((out / "certify_report.json").read_text())
    pl = payload["report"]["per_lambda"][0]
    print(f"lam = {pl['lam']:g}: {pl['n_pass']}/{pl['n_entries']} entries pass, "
          f"worst margin {pl['worst_margin']:.4f}")

    lines = (out / "certify_entries.csv").read_text().strip().splitlines()
    print(f"entries table: {len(lines) - 1} rows, header: {lines[0]}")

    code = cli.main(["uncertainty", "--out", str(out),
                     "--field-family", "periodic-square", "--field-dim", "1",
                     "--field-grid", "512", "--field-period", "6.283185307179586",
                     "--field-delta", "0.3", "--field-mollify", "0.05",
                     "--mask", "annulus", "--lambdas", "16 64 200"])
    print(f"uncertainty exit code: {code}")
    lines = (out / "uncertainty_sweep.csv").read_text().strip().splitlines()
    for line in lines:
        print("  " + line)


if __name__ == "__main__":
    main()
