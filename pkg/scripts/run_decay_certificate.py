#!/usr/bin/env python3
"""Run the bundled decay-certificate preset and print the certified numbers."""

import argparse
import json
import os
import sys

from kbstrip.cli import main as cli_main


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/decay_cert", help="output directory")
    ap.add_argument("--quiet", action="store_true")
    args = ap.parse_args()

    status = cli_main(["preset", "decay_cert", "--out", args.out]
                      + (["--quiet"] if args.quiet else []))
    report_path = os.path.join(args.out, "report.json")
    if os.path.isfile(report_path):
        with open(report_path, "r", encoding="utf-8") as fh:
            report = json.load(fh)
        cert = report.get("certificate", {})
        print(f"chi            = {cert.get('chi')}")
        print(f"b0             = {cert.get('b0')}")
        print(f"violations     = {len(cert.get('violations', []))}")
        print(f"C_fit          = {report.get('gradient_C_fit')}")
        print(f"buffer flagged = {report.get('buffer_flagged')}")
    return status


if __name__ == "__main__":
    sys.exit(main())
