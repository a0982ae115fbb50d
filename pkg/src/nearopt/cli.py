"""Command-line front door.

Each subcommand runs one pipeline stage (or the whole pipeline up to it has
to exist already — stages check their inputs through the run manifest).
`serve` starts the what-if HTTP service over a finished run directory.

Exit codes: 0 on success, 1 on runtime failures (solver, stale artifacts,
I/O), 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigurationError, NearoptError, ParameterError
from .pipeline import STAGES, RunConfig, run_pipeline

__all__ = ["main"]


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nearopt",
        description=(
            "Optimize renewable fuel import pathways, map the near-optimal "
            "design space, and distill it into archetypes."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="run config YAML")
        p.add_argument("--pathway", help="restrict to one pathway")
        p.add_argument("--seed", type=int, help="override the config seed")
        return p

    add("optimize", "solve the cost-optimal design per pathway")
    add("maa", "map the near-optimal region's convex hull")
    add("sample", "draw uniform samples from the mapped region")
    add("cluster", "group sampled designs into archetypes")
    add("tree", "fit a decision tree over the sampled designs")
    add("report", "merge stage outputs into a report bundle")
    serve = add("serve", "serve the what-if HTTP API over finished runs")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    return parser


def _stages_for(command: str) -> tuple[str, ...]:
    return (command,)


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = RunConfig.from_file(args.config, seed=args.seed)
        if args.command == "serve":
            return _serve(cfg, args.host, args.port)
        pathways = (args.pathway,) if args.pathway else None
        run_pipeline(cfg, stages=_stages_for(args.command), pathways=pathways)
    except (ConfigurationError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NearoptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def _serve(cfg: RunConfig, host: str, port: int) -> int:
    import uvicorn

    from .service.app import create_app

    app = create_app(cfg.output_dir, cfg.catalog_path, cfg.weather_path)
    uvicorn.run(app, host=host, port=port, log_level="info")
    return 0


if __name__ == "__main__":
    sys.exit(main())
