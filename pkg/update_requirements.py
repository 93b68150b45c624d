#!/usr/bin/env python3
"""Pin rough-sio's dependencies: compile requirements.in into requirements.txt with pip-tools."""

from __future__ import annotations

import argparse
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Compile the pinned requirements.txt for rough-sio.")
    parser.add_argument("--input", default=str(ROOT / "requirements.in"),
                        help="Top-level dependency list (default: requirements.in).")
    parser.add_argument("--output", default=str(ROOT / "requirements.txt"),
                        help="Pinned output file (default: requirements.txt).")
    parser.add_argument("--upgrade", action="store_true",
                        help="Move every pin to the newest release allowed by requirements.in.")
    return parser.parse_args()


def compile_command(input_path: Path, output_path: Path, upgrade: bool) -> list[str]:
    command = [sys.executable, "-m", "piptools", "compile", str(input_path), "--output-file", str(output_path)]
    if upgrade:
        command.append("--upgrade")
    return command


def main() -> int:
    args = parse_args()
    input_path = Path(args.input).resolve()
    output_path = Path(args.output).resolve()
    if not input_path.exists():
        print(f"Input file not found: {input_path}", file=sys.stderr)
        return 2

    try:
        subprocess.run(compile_command(input_path, output_path, args.upgrade), check=True)
    except subprocess.CalledProcessError:
        print("pip-compile failed; install pip-tools first (pip install pip-tools)", file=sys.stderr)
        return 1

    print(f"Pinned requirements written to {output_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
