"""CLI: ``aoisched-plot --spec <json>`` renders one figure per invocation."""

from __future__ import annotations

import argparse
import sys

from .render import PlotSpec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="aoisched-plot",
        description="Render a figure from a simulator results CSV.",
    )
    parser.add_argument("--spec", required=True, help="plot spec JSON")
    args = parser.parse_args(argv)
    try:
        result = render(PlotSpec.from_json(args.spec))
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {result.kind} figure to {result.output_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
