"""Command-line experiment runner.

Subcommands:

* ``run``          execute N independent protocol trials from a config file
                   and write an aggregated report (JSON or CSV).
* ``sweep``        tabulate the probe-information curve over an error-rate
                   grid as CSV.
* ``delay``        print the block-transmission delay bound for a link.
* ``attack-table`` run every adversary strategy against one base config and
                   write a comparison CSV.

Config files are flat JSON objects holding exactly the experiment fields
(see ``CONFIG_KEYS``); unknown keys are rejected so typos in security
parameters cannot pass silently.  Reports contain no timestamps and are
byte-identical for identical inputs.

Exit codes: 0 success, 1 I/O failure, 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, replace

from .channel import AttackModel, ChannelModel, MeasBasis, NoiseKind, ProbeParams
from .protocol import ConfigError, ProtocolConfig, RunReport, Verdict, mix_seed, run_protocol
from .security import DelayInputs, OpDistribution, eigenvalues_closed_form, eve_information, min_delay

REPORT_SCHEMA_ID = "qsdc-run-report/1"

SWEEP_HEADER = ["eps", "p0", "p1", "p2", "p3", "lambda0", "lambda1", "lambda2", "lambda3", "I0_bits"]
ATTACK_TABLE_HEADER = [
    "attack",
    "first_check_error_rate",
    "second_check_error_rate",
    "detection_probability",
    "eve_harvest_accuracy",
]
RUN_CSV_HEADER = [
    "trial",
    "seed",
    "verdict",
    "first_check_error_rate",
    "second_check_error_rate",
    "pairs_lost",
    "eve_harvest_bits",
    "eve_harvest_accuracy",
    "decoded_matches_message",
]

_DEFAULTS: dict[str, object] = {
    "seed": 0,
    "check_fraction": 0.1,
    "sample_fraction": 0.05,
    "error_threshold": 0.05,
    "swap_filter": False,
    "channel_c_noise": "ideal",
    "channel_c_p": 0.0,
    "channel_c_loss": 0.0,
    "channel_m_noise": "ideal",
    "channel_m_p": 0.0,
    "channel_m_loss": 0.0,
    "attack": "none",
    "attack_basis": None,
    "probe_error_rate": None,
    "distance_m": None,
    "signal_speed_mps": 2.0e8,
    "photon_rate_hz": None,
    "trials": 1,
    "output_format": "json",
    "output_path": None,
}
CONFIG_KEYS = frozenset(_DEFAULTS) | {"n_pairs", "message"}


@dataclass(frozen=True)
class ExperimentSpec:
    """A protocol configuration plus trial count and output destination."""

    config: ProtocolConfig
    trials: int
    output_path: str | None
    output_format: str


def _field(raw: dict, key: str, kind, required: bool = False):
    if key not in raw or raw[key] is None:
        if required:
            raise ConfigError(f"missing required config field '{key}'")
        return _DEFAULTS.get(key)
    value = raw[key]
    if isinstance(value, bool) and kind is not bool:
        raise ConfigError(f"config field '{key}' has wrong type: {value!r}")
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise ConfigError(f"config field '{key}' has wrong type: {value!r}")
    return value


def _parse_basis(raw: dict, key: str) -> MeasBasis:
    value = _field(raw, key, str)
    if value is None:
        return MeasBasis.Z
    try:
        return MeasBasis(value.upper())
    except ValueError:
        raise ConfigError(f"config field '{key}' must be 'Z' or 'X', got {value!r}") from None


def _parse_channel(raw: dict, prefix: str) -> ChannelModel:
    noise = _field(raw, f"{prefix}_noise", str)
    p = _field(raw, f"{prefix}_p", float)
    loss = _field(raw, f"{prefix}_loss", float)
    try:
        kind = NoiseKind(noise)
    except ValueError:
        raise ConfigError(
            f"config field '{prefix}_noise' must be one of "
            f"{[k.value for k in NoiseKind]}, got {noise!r}"
        ) from None
    try:
        return ChannelModel(kind, p, loss)
    except ValueError as exc:
        raise ConfigError(f"invalid {prefix}: {exc}") from None


def _parse_attack(raw: dict) -> AttackModel:
    name = _field(raw, "attack", str)
    basis_given = raw.get("attack_basis") is not None
    probe_given = raw.get("probe_error_rate") is not None
    try:
        if name == "none":
            if basis_given or probe_given:
                raise ConfigError("attack 'none' takes neither attack_basis nor probe_error_rate")
            return AttackModel.none()
        if name == "intercept_resend":
            if probe_given:
                raise ConfigError("attack 'intercept_resend' takes no probe_error_rate")
            return AttackModel.intercept_resend(_parse_basis(raw, "attack_basis"))
        if name == "intercept_m_only":
            if probe_given:
                raise ConfigError("attack 'intercept_m_only' takes no probe_error_rate")
            return AttackModel.intercept_m_only(_parse_basis(raw, "attack_basis"))
        if name == "fake_epr":
            if basis_given or probe_given:
                raise ConfigError("attack 'fake_epr' takes neither attack_basis nor probe_error_rate")
            return AttackModel.fake_epr()
        if name == "unitary_probe":
            if basis_given:
                raise ConfigError("attack 'unitary_probe' takes no attack_basis")
            eps = _field(raw, "probe_error_rate", float, required=True)
            return AttackModel.unitary_probe(ProbeParams.from_error_rate(eps))
    except ValueError as exc:
        raise ConfigError(f"invalid attack parameters: {exc}") from None
    raise ConfigError(
        "config field 'attack' must be one of none, intercept_resend, fake_epr, "
        f"unitary_probe, intercept_m_only; got {name!r}"
    )


def load_experiment_spec(path: str, overrides: dict | None = None) -> ExperimentSpec:
    """Read and validate a flat JSON experiment config.

    ``overrides`` (from command-line flags) replace file values before
    validation.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a JSON object")
    for key in raw:
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key '{key}'")
    if overrides:
        raw = {**raw, **{k: v for k, v in overrides.items() if v is not None}}
    trials = _field(raw, "trials", int)
    if trials < 1:
        raise ConfigError(f"config field 'trials' must be >= 1, got {trials}")
    output_format = _field(raw, "output_format", str)
    if output_format not in ("json", "csv"):
        raise ConfigError(f"config field 'output_format' must be json or csv, got {output_format!r}")
    try:
        config = ProtocolConfig(
            n_pairs=_field(raw, "n_pairs", int, required=True),
            message=_field(raw, "message", str, required=True),
            seed=_field(raw, "seed", int),
            check_fraction=_field(raw, "check_fraction", float),
            sample_fraction=_field(raw, "sample_fraction", float),
            error_threshold=_field(raw, "error_threshold", float),
            channel_c=_parse_channel(raw, "channel_c"),
            channel_m=_parse_channel(raw, "channel_m"),
            attack=_parse_attack(raw),
            swap_filter=_field(raw, "swap_filter", bool),
            distance_m=_field(raw, "distance_m", float),
            signal_speed_mps=_field(raw, "signal_speed_mps", float),
            photon_rate_hz=_field(raw, "photon_rate_hz", float),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return ExperimentSpec(
        config=config,
        trials=trials,
        output_path=_field(raw, "output_path", str),
        output_format=output_format,
    )


def _mean(xs: list[float]) -> float | None:
    return sum(xs) / len(xs) if xs else None

def _std(xs: list[float]) -> float | None:
    if not xs:
        return None
    m = sum(xs) / len(xs)
    return math.sqrt(sum((x - m) ** 2 for x in xs) / len(xs))


def run_trials(spec: ExperimentSpec) -> list[RunReport]:
    """Execute the spec's trials with per-trial derived seeds."""
    reports = []
    for i in range(spec.trials):
        cfg = replace(spec.config, seed=mix_seed(spec.config.seed, i))
        reports.append(run_protocol(cfg))
    return reports


def _config_echo(spec: ExperimentSpec) -> dict:
    cfg = spec.config
    return {
        "n_pairs": cfg.n_pairs,
        "message_bits": len(cfg.message),
        "seed": cfg.seed,
        "check_fraction": cfg.check_fraction,
        "sample_fraction": cfg.sample_fraction,
        "error_threshold": cfg.error_threshold,
        "channel_c": {"noise": cfg.channel_c.noise.value, "p": cfg.channel_c.p, "loss": cfg.channel_c.loss},
        "channel_m": {"noise": cfg.channel_m.noise.value, "p": cfg.channel_m.p, "loss": cfg.channel_m.loss},
        "attack": cfg.attack.kind.value,
        "attack_basis": cfg.attack.basis.value if cfg.attack.basis else None,
        "probe_error_rate": cfg.attack.probe.error_rate if cfg.attack.probe else None,
        "swap_filter": cfg.swap_filter,
        "trials": spec.trials,
    }


def aggregate_report(spec: ExperimentSpec, reports: list[RunReport]) -> dict:
    """Aggregate per-trial reports into the JSON report structure."""
    accepted = [r for r in reports if r.verdict is Verdict.ACCEPT]
    first = [r.first_check_error_rate for r in reports]
    second = [r.second_check_error_rate for r in reports if r.second_check_error_rate is not None]
    accuracies = [r.eve_harvest_accuracy for r in reports if r.eve_harvest_accuracy is not None]
    matches = [r.decoded_message == spec.config.message for r in accepted]
    per_trial = []
    for i, r in enumerate(reports):
        d = r.to_dict()
        d["trial"] = i
        per_trial.append(d)
    return {
        "schema": REPORT_SCHEMA_ID,
        "config": _config_echo(spec),
        "trials": len(reports),
        "aggregate": {
            "accept_fraction": len(accepted) / len(reports),
            "first_check_error_rate_mean": _mean(first),
            "first_check_error_rate_std": _std(first),
            "second_check_error_rate_mean": _mean(second),
            "second_check_error_rate_std": _std(second),
            "eve_harvest_accuracy_mean": _mean(accuracies),
            "pairs_lost_mean": _mean([float(r.pairs_lost) for r in reports]),
            "message_match_fraction": (
                sum(matches) / len(matches) if matches else None
            ),
        },
        "per_trial": per_trial,
    }


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def cmd_run(args: argparse.Namespace) -> int:
    overrides = {"seed": args.seed, "trials": args.trials, "output_format": args.format}
    spec = load_experiment_spec(args.config, overrides)
    out_path = args.out if args.out is not None else spec.output_path
    reports = run_trials(spec)
    if spec.output_format == "json":
        payload = aggregate_report(spec, reports)
        _write_text(out_path, json.dumps(payload, sort_keys=True, indent=2) + "\n")
    else:
        rows = [RUN_CSV_HEADER]
        for i, r in enumerate(reports):
            matches = None
            if r.verdict is Verdict.ACCEPT:
                matches = r.decoded_message == spec.config.message
            rows.append(
                [
                    _fmt(i),
                    _fmt(r.seed),
                    r.verdict.value,
                    _fmt(r.first_check_error_rate),
                    _fmt(r.second_check_error_rate),
                    _fmt(r.pairs_lost),
                    _fmt(r.eve_harvest_bits),
                    _fmt(r.eve_harvest_accuracy),
                    _fmt(matches),
                ]
            )
        _write_text(out_path, "\n".join(",".join(row) for row in rows) + "\n")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    if args.steps < 2:
        raise ConfigError(f"steps must be >= 2, got {args.steps}")
    if not (0.0 <= args.eps_start <= 1.0 and 0.0 <= args.eps_stop <= 1.0):
        raise ConfigError("eps grid must lie within [0, 1]")
    try:
        dist = OpDistribution(args.p0, args.p1, args.p2, args.p3)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    lines = [",".join(SWEEP_HEADER)]
    for i in range(args.steps):
        eps = args.eps_start + (args.eps_stop - args.eps_start) * i / (args.steps - 1)
        lams = eigenvalues_closed_form(dist, eps)
        info = eve_information(dist, eps)
        row = [eps, *dist.as_tuple(), *lams, info]
        lines.append(",".join(format(v, ".12g") for v in row))
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_delay(args: argparse.Namespace) -> int:
    try:
        inputs = DelayInputs(
            distance_m=args.L,
            signal_speed_mps=args.c,
            block_size=args.N,
            photons_per_second=args.f,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    print(f"{min_delay(inputs):.6e}")
    return 0


_TABLE_ATTACKS = ("none", "intercept_resend", "fake_epr", "unitary_probe", "intercept_m_only")


def cmd_attack_table(args: argparse.Namespace) -> int:
    overrides = {"seed": args.seed, "trials": args.trials}
    spec = load_experiment_spec(args.config, overrides)
    lines = [",".join(ATTACK_TABLE_HEADER)]
    for row_index, name in enumerate(_TABLE_ATTACKS):
        if name == "none":
            attack = AttackModel.none()
        elif name == "intercept_resend":
            attack = AttackModel.intercept_resend(MeasBasis.Z)
        elif name == "fake_epr":
            attack = AttackModel.fake_epr()
        elif name == "unitary_probe":
            attack = AttackModel.unitary_probe(ProbeParams.from_error_rate(args.probe_eps))
        else:
            attack = AttackModel.intercept_m_only(MeasBasis.Z)
        base = replace(spec.config, attack=attack, seed=mix_seed(spec.config.seed, row_index))
        reports = run_trials(ExperimentSpec(base, spec.trials, None, "json"))
        accepted = sum(1 for r in reports if r.verdict is Verdict.ACCEPT)
        second = [r.second_check_error_rate for r in reports if r.second_check_error_rate is not None]
        accuracies = [r.eve_harvest_accuracy for r in reports if r.eve_harvest_accuracy is not None]
        lines.append(
            ",".join(
                [
                    name,
                    _fmt(_mean([r.first_check_error_rate for r in reports])),
                    _fmt(_mean(second)),
                    _fmt(1.0 - accepted / len(reports)),
                    _fmt(_mean(accuracies)),
                ]
            )
        )
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _seed_type(text: str) -> int:
    value = int(text)
    if not 0 <= value <= 0xFFFFFFFFFFFFFFFF:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsdc",
        description="Simulate and analyze the EPR-block direct-communication protocol.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run protocol trials from a config file")
    p_run.add_argument("--config", required=True, help="path to a flat JSON experiment config")
    p_run.add_argument("--out", default=None, help="report destination (default: stdout or config's output_path)")
    p_run.add_argument("--format", choices=("json", "csv"), default=None, help="report format override")
    p_run.add_argument("--seed", type=_seed_type, default=None, help="seed override")
    p_run.add_argument("--trials", type=int, default=None, help="trial-count override")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="tabulate probe information over an error-rate grid")
    p_sweep.add_argument("--eps-start", type=float, default=0.0)
    p_sweep.add_argument("--eps-stop", type=float, default=1.0)
    p_sweep.add_argument("--steps", type=int, default=21)
    p_sweep.add_argument("--p0", type=float, default=0.25)
    p_sweep.add_argument("--p1", type=float, default=0.25)
    p_sweep.add_argument("--p2", type=float, default=0.25)
    p_sweep.add_argument("--p3", type=float, default=0.25)
    p_sweep.add_argument("--out", default=None, help="CSV destination (default stdout)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_delay = sub.add_parser("delay", help="print the block-transmission delay bound")
    p_delay.add_argument("L", type=float, help="distance in meters")
    p_delay.add_argument("c", type=float, help="signal speed in meters/second")
    p_delay.add_argument("N", type=int, help="block size in pairs")
    p_delay.add_argument("f", type=float, help="photons per second")
    p_delay.set_defaults(func=cmd_delay)

    p_table = sub.add_parser("attack-table", help="compare all adversary strategies on one config")
    p_table.add_argument("--config", required=True)
    p_table.add_argument("--out", default=None, help="CSV destination (default stdout)")
    p_table.add_argument("--seed", type=_seed_type, default=None)
    p_table.add_argument("--trials", type=int, default=None)
    p_table.add_argument("--probe-eps", type=float, default=0.25, help="probe error rate for the unitary_probe row")
    p_table.set_defaults(func=cmd_attack_table)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
