"""Command line: `qkdn-orr run`, `qkdn-orr compare`, `qkdn-orr kms serve`."""

from __future__ import annotations

import argparse
import logging
import os
import secrets
import sys
from pathlib import Path

from dotenv import load_dotenv

from qkdn_orr.config import ENV_PREFIX, RunConfig, load_run_config
from qkdn_orr.crypto import RandomSource
from qkdn_orr.errors import ConfigError, QkdnError
from qkdn_orr.harness import (
    Scenario,
    ScenarioReport,
    ScenarioRunner,
    compare_models,
    export_csv,
    export_raw,
    read_csv,
)
from qkdn_orr.kms import HttpKmsClient, InProcessKmsClient, KeyManagementService, KmsClient
from qkdn_orr.logs import configure_logging

logger = logging.getLogger("qkdn_orr.cli")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


def _bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {value!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qkdn-orr",
        description="Benchmark KR, TN and ORR key distribution over a simulated QKD network.",
    )
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ...")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run benchmark scenarios and write CSV results")
    run.add_argument("--config", type=Path, default=None, help="TOML file with run keys")
    run.add_argument("--model", default=None, help="kr, tn, orr or all")
    run.add_argument("--nodes", default=None, help="comma separated circuit sizes")
    run.add_argument("--trials", type=int, default=None)
    run.add_argument("--warmup", type=int, default=None)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--latency-us", type=float, default=None)
    run.add_argument("--latency-model", default=None, choices=["zero", "fixed", "per_hop"])
    run.add_argument("--virtual-clock", action=argparse.BooleanOptionalAction, default=None)
    run.add_argument("--orr-qkd-every-hop", type=_bool, default=None)
    run.add_argument("--out", type=Path, default=None)
    run.add_argument("--raw", type=Path, default=None, help="per-trial CSV dump")
    run.add_argument("--recv-timeout", type=float, default=None, help="seconds")
    run.add_argument("--log-level", default=None, dest="run_log_level")
    kms_mode = run.add_mutually_exclusive_group()
    kms_mode.add_argument("--kms-http", default=None, metavar="URL")
    kms_mode.add_argument("--kms-inproc", action="store_true")

    compare = commands.add_parser("compare", help="order models from an aggregate CSV")
    compare.add_argument("--in", dest="input", type=Path, required=True)

    kms = commands.add_parser("kms", help="mock key management service")
    kms_commands = kms.add_subparsers(dest="kms_command", required=True)
    serve = kms_commands.add_parser("serve", help="serve the ETSI GS QKD 014 API")
    serve.add_argument("--addr", default="127.0.0.1:8014", help="host:port")
    serve.add_argument("--seed", type=int, default=None)
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    overrides = {
        "model": args.model,
        "nodes": args.nodes,
        "trials": args.trials,
        "warmup": args.warmup,
        "seed": args.seed,
        "latency_us": args.latency_us,
        "latency_model": args.latency_model,
        "virtual_clock": args.virtual_clock,
        "orr_qkd_every_hop": args.orr_qkd_every_hop,
        "out": args.out,
        "raw": args.raw,
        "kms_url": args.kms_http,
        "recv_timeout": args.recv_timeout,
        "log_level": args.run_log_level or args.log_level,
    }
    return overrides


def _kms_for(config: RunConfig) -> tuple[KmsClient, str]:
    if config.kms_url:
        # a shared service outlives this run, so node ids get a fresh prefix
        return HttpKmsClient(config.kms_url), f"r{secrets.token_hex(3)}-"
    service = KeyManagementService(RandomSource.derive(config.seed, "kms"))
    return InProcessKmsClient(service), ""


def cmd_run(args: argparse.Namespace) -> int:
    try:
        overrides = _overrides(args)
        if args.kms_inproc:
            overrides["kms_url"] = ""
        config = load_run_config(overrides, args.config)
        scenarios = [
            Scenario(
                model=model,
                circuit_sizes=config.nodes,
                trials=config.trials,
                seed=config.seed,
                latency=config.channel_config(),
                orr_qkd_every_hop=config.orr_qkd_every_hop,
                warmup=config.warmup,
                recv_timeout=config.recv_timeout,
            )
            for model in config.models
        ]
    except (ConfigError, ValueError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    configure_logging(config.log_level)

    kms, tag = _kms_for(config)
    report = ScenarioReport()
    try:
        for scenario in scenarios:
            report.extend(ScenarioRunner(scenario.model_copy(update={"tag": tag}), kms).run())
    except QkdnError as e:
        logger.error("run aborted: %s", e)
        return EXIT_FAILED

    if report.rows:
        export_csv(report.rows, config.out)
        logger.info("wrote %d rows to %s", len(report.rows), config.out)
    if config.raw is not None:
        export_raw(report.raw, config.raw)
        logger.info("wrote %d trials to %s", len(report.raw), config.raw)

    if report.invalid:
        print(
            f"{len(report.invalid)} of {report.attempted} trials invalid "
            f"({report.invalid_rate:.2%}); first: {report.invalid[0].error}",
            file=sys.stderr,
        )
        return EXIT_FAILED
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    try:
        rows = read_csv(args.input)
        report = compare_models(rows)
    except (OSError, ValueError, QkdnError) as e:
        print(f"compare failed: {e}", file=sys.stderr)
        return EXIT_FAILED
    print(report.render())
    return EXIT_OK


def cmd_kms_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from qkdn_orr.kms.server import create_app

    host, _, port = args.addr.rpartition(":")
    if not host or not port.isdigit():
        print(f"configuration error: --addr must be host:port, got {args.addr!r}", file=sys.stderr)
        return EXIT_CONFIG
    seed = args.seed
    if seed is None and os.environ.get(ENV_PREFIX + "SEED"):
        seed = int(os.environ[ENV_PREFIX + "SEED"])
    service = KeyManagementService(RandomSource.derive(seed, "kms"))
    logger.info("serving mock KMS on %s:%s", host, port)
    uvicorn.run(create_app(service), host=host, port=int(port), log_level="info")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level or os.environ.get(ENV_PREFIX + "LOG_LEVEL") or "INFO")
    if args.command == "run":
        return cmd_run(args)
    if args.command == "compare":
        return cmd_compare(args)
    return cmd_kms_serve(args)


if __name__ == "__main__":
    sys.exit(main())
