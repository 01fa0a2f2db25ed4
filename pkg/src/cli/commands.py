"""
子命令实现
每个处理函数接收解析后的选项和运行上下文，返回 CommandResult，不直接写输出
"""

import logging
from dataclasses import dataclass
from fractions import Fraction

from src.cli.render import CommandResult
from src.core.dice import difference_die, format_rational
from src.core.dominance import (
    DominanceSequence,
    cycle_direction,
    difference_lattice,
    dominance_sequence,
    iter_labels,
    scan_inversion,
    span_shift,
    tilt_counts,
    trinary_code,
)
from src.core.edgeworth import (
    certified_threshold,
    compute_params,
    error_bound,
    expanded_bound,
    leading_coefficient,
    leading_term,
    truncate_decimal,
)
from src.core.errors import (
    BelowValidityFloorError,
    NoLeadingTermError,
    PreconditionError,
    ThresholdNotFoundError,
    UnsupportedLatticeError,
)
from src.core.inversion import first_inversion_scan, is_nondecreasing, quadratic_fit
from src.core.lattice import PowerCache, to_lattice
from src.core.mapper import (
    Domain,
    GridSpec,
    check_three_sided_claims,
    slice_records,
    sweep3,
    sweep4,
    write_csv,
    write_pgm,
)
from src.core.verifier import ExhaustiveVerifier, ExpectedPattern

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MISMATCH = 2

DIRECTION_NAMES = {1: "forward", -1: "reverse", 0: "none"}


@dataclass
class RunContext:
    settings: dict
    jobs: int = 1
    kernel: str = "auto"
    cancel: object = None

    def section(self, name):
        return self.settings.get(name, {})

    def progress(self, what):
        """每推进 10% 记录一条 INFO 日志"""
        last = -1

        def progress_updated(current, total):
            nonlocal last
            decile = current * 10 // max(total, 1)
            if decile != last:
                last = decile
                logger.info(f"{what}... {current}/{total}")

        return progress_updated


def _pair_payload(command, opts):
    return {"command": command, "a": str(opts.a), "b": str(opts.b)}


def compare_command(opts, ctx):
    dist = difference_lattice(opts.a, opts.b)
    rolls = opts.rolls
    labels = DominanceSequence(tuple(
        label for _, label in iter_labels(dist, rolls[-1], ctx.kernel, ctx.cancel, start=rolls[0])
    ))
    payload = _pair_payload("compare", opts)
    payload.update({"k_start": rolls[0], "k_end": rolls[-1], "labels": str(labels)})
    rows = [[k, label.letter] for k, label in zip(rolls, labels.labels)]
    return CommandResult(payload, [str(labels)], (["k", "label"], rows))


def sequence_command(opts, ctx):
    seq = dominance_sequence(opts.a, opts.b, opts.kmax, ctx.kernel, ctx.cancel)
    code = trinary_code(seq)
    witness = scan_inversion(seq.labels, max_period=max(opts.a.sides, opts.b.sides))
    payload = _pair_payload("sequence", opts)
    payload.update({
        "kmax": opts.kmax,
        "labels": str(seq),
        "code": code.digits,
        "code_value": str(code.value),
        "inversion": {
            "k": witness.k,
            "prefix": witness.prefix_label.letter if witness.prefix_label else None,
            "tie_at": witness.tie_at,
            "periodic_suffix": witness.periodic_suffix,
        },
    })
    lines = [
        f"labels: {seq}",
        f"code: {code.digits} ({code.value})",
        f"first inversion: {witness.k if witness.k is not None else '-'}",
    ]
    if witness.tie_at is not None:
        lines.append(f"tie at: {witness.tie_at}")
    if witness.periodic_suffix:
        lines.append("suffix looks periodic")
    rows = [[k, label.letter] for k, label in enumerate(seq.labels, start=1)]
    return CommandResult(payload, lines, (["k", "label"], rows))


def tilt_command(opts, ctx):
    scale, dist = to_lattice(difference_die(opts.a, opts.b))
    center = opts.center if opts.center is not None else Fraction(0)
    cache = PowerCache(dist, ctx.kernel, ctx.cancel)
    entries = [(k, tilt_counts(current, center * scale))
               for k, current in cache.successive(opts.rolls[0], opts.rolls[-1])]
    payload = _pair_payload("tilt", opts)
    payload.update({
        "center": format_rational(center),
        "rows": [{"k": k, **counts.to_dict(), "label": counts.label.letter} for k, counts in entries],
    })
    lines = [f"k={k} above={c.above} equal={c.equal} below={c.below} label={c.label.letter}" for k, c in entries]
    rows = [[k, c.above, c.equal, c.below, c.label.letter] for k, c in entries]
    return CommandResult(payload, lines, (["k", "above", "equal", "below", "label"], rows))


def span_command(opts, ctx):
    scale, dist = to_lattice(difference_die(opts.a, opts.b))
    span = span_shift(dist)
    payload = _pair_payload("span", opts)
    payload.update({
        "span": format_rational(Fraction(span.b, scale)),
        "shift": format_rational(Fraction(span.a, scale)),
        "scale": scale,
        "lattice_span": span.b,
        "lattice_shift": span.a,
    })
    lines = [f"span = {payload['span']}", f"shift = {payload['shift']}"]
    if scale != 1:
        lines.append(f"lattice scale = {scale} (span {span.b}, shift {span.a})")
    return CommandResult(payload, lines)


def edgeworth_command(opts, ctx):
    config = ctx.section("edgeworth")
    digits = opts.digits or config.get("digits", 6)
    dps = opts.dps or config.get("precision_dps", 60)
    params = compute_params(difference_lattice(opts.a, opts.b), opts.C, dps)

    exact = {name: format_rational(value) for name, value in params.exact_fields().items()}
    real = {name: truncate_decimal(value, digits) for name, value in params.real_fields().items()}
    expanded = {name: truncate_decimal(value, digits) for name, value in expanded_bound(params).coefficients().items()}
    lead = truncate_decimal(leading_coefficient(params), digits)

    certificate = None
    note = None
    if opts.threshold:
        try:
            certificate = certified_threshold(
                params,
                check_factor=config.get("check_factor", 20),
                prescreen_margin=config.get("prescreen_margin", 1e-5),
            )
        except (NoLeadingTermError, UnsupportedLatticeError, ThresholdNotFoundError) as e:
            note = str(e)
            logger.warning(f"未计算阈值: {e}")

    evaluations = []
    for n in opts.at:
        try:
            bound = truncate_decimal(error_bound(params, n), digits + 6)
        except BelowValidityFloorError as e:
            logger.warning(str(e))
            bound = None
        evaluations.append({"n": n, "leading": truncate_decimal(leading_term(params, n), digits + 6), "bound": bound})

    payload = _pair_payload("edgeworth", opts)
    payload.update({
        "digits": digits,
        "exact": exact,
        "real": real,
        "leading_coefficient": lead,
        "validity_floor": params.validity_floor,
        "expanded_bound": expanded,
        "threshold": certificate.threshold if certificate else None,
        "check_radius": certificate.check_radius if certificate else None,
        "certificate": certificate.to_dict() if certificate else None,
        "threshold_note": note,
        "evaluations": evaluations,
    })

    lines = [f"{name} = {value}" for name, value in exact.items()]
    lines += [f"{name} = {value}" for name, value in real.items()]
    lines.append(f"leading_coefficient = {lead}")
    lines.append(f"validity_floor = {params.validity_floor}")
    lines += [f"expanded.{name} = {value}" for name, value in expanded.items()]
    if certificate:
        lines.append(f"threshold = {certificate.threshold}")
        lines.append(f"check_radius = {certificate.check_radius}")
        lines.append(f"tail_monotone = {str(certificate.tail_monotone).lower()}")
    elif note:
        lines.append(f"threshold = - ({note})")
    for item in evaluations:
        lines.append(f"n={item['n']} leading={item['leading']} bound={item['bound'] or '-'}")
    rows = [[name, value] for name, value in {**exact, **real}.items()]
    rows += [["threshold", payload["threshold"]], ["check_radius", payload["check_radius"]]]
    return CommandResult(payload, lines, (["name", "value"], rows))


def verify_command(opts, ctx):
    if opts.min_k > opts.max_k:
        raise PreconditionError(f"--min-k ({opts.min_k}) 大于 --max-k ({opts.max_k})")
    checkpoint = opts.checkpoint
    if checkpoint == "":
        checkpoint = ctx.section("checkpoint").get("database")
    if opts.resume and not checkpoint:
        raise PreconditionError("--resume 需要 --checkpoint")

    expected = ExpectedPattern.win_at(opts.expect_win_at, default=opts.expect_default)
    verifier = ExhaustiveVerifier(
        opts.a, opts.b, range(opts.min_k, opts.max_k + 1), expected,
        checkpoint=checkpoint,
        resume=opts.resume,
        jobs=ctx.jobs,
        kernel=ctx.kernel,
        cancel=ctx.cancel,
        commit_every=ctx.section("checkpoint").get("commit_every", 64),
        progress_updated=ctx.progress("验证"),
    )
    report = verifier.run()
    if report.resumed_from is not None:
        logger.info(f"本次从 k = {report.resumed_from} 续算")

    payload = _pair_payload("verify", opts)
    payload.update({
        "expectation": expected.describe(),
        "k_start": report.k_start,
        "k_end": report.k_end,
        "checked": report.checked,
        "mismatch_count": len(report.mismatches),
        "mismatches": list(report.mismatches),
        "complete": report.complete,
    })
    lines = [f"{len(report.mismatches)} mismatches"]
    if report.mismatches:
        lines.append("mismatch k: " + ",".join(map(str, report.mismatches)))
    exit_code = EXIT_MISMATCH if report.mismatches else EXIT_OK
    return CommandResult(payload, lines, (["k"], [[k] for k in report.mismatches]), exit_code)


def _record_dict(record):
    keys = ("x", "y")
    data = {keys[i]: format_rational(c) for i, c in enumerate(record.coords)}
    data.update({"labels": str(record.labels), "code": record.code})
    return data


def _map_result(command, opts, ctx, spec, records, extra):
    """map3/map4 共用的输出部分"""
    config = ctx.section("mapper")
    plotted = slice_records(records, opts.slice_k) if opts.slice_k else records
    depth = opts.depth or (1 if opts.slice_k else min(config.get("depth", 20), spec.kmax))

    csv_path = pgm_path = None
    if opts.out:
        csv_path, pgm_path = f"{opts.out}.csv", f"{opts.out}.pgm"
        write_csv(records, csv_path)
        write_pgm(plotted, spec, pgm_path, depth)

    payload = {
        "command": command,
        "resolution": spec.resolution,
        "kmax": spec.kmax,
        "domain": spec.domain.value,
        "points": len(records),
        "slice_k": opts.slice_k,
        "depth": depth,
        "csv": csv_path,
        "pgm": pgm_path,
        **extra,
        "records": [_record_dict(r) for r in records],
    }
    dicts = payload["records"]
    header = list(dicts[0]) if dicts else ["x", "labels", "code"]
    rows = [list(d.values()) for d in dicts]
    if opts.out:
        lines = [f"wrote {len(records)} records to {csv_path}", f"wrote image {pgm_path} (depth {depth})"]
    else:
        lines = [" ".join(d.values()) for d in dicts]
    return CommandResult(payload, lines, (header, rows))


def map3_command(opts, ctx):
    config = ctx.section("mapper")
    if (opts.x_min is None) != (opts.x_max is None):
        raise PreconditionError("--x-min 与 --x-max 必须同时给出")
    x_range = (opts.x_min, opts.x_max) if opts.x_min is not None else None
    spec = GridSpec(opts.resolution or config.get("resolution", 200), opts.kmax or config.get("kmax", 20),
                    Domain.THREE_SIDED, x_range)
    records = list(sweep3(spec, ctx.jobs, ctx.kernel, ctx.cancel, ctx.progress("扫描")))
    extra = {}
    exit_code = EXIT_OK
    if opts.assert_claims:
        anomalies = check_three_sided_claims(records)
        extra["anomalies"] = [{"x": format_rational(c[0]), "issue": what} for c, what in anomalies]
        if anomalies:
            exit_code = EXIT_MISMATCH
    result = _map_result("map3", opts, ctx, spec, records, extra)
    if opts.assert_claims:
        result.lines.append(f"{len(extra['anomalies'])} anomalies")
    result.exit_code = exit_code
    return result


def map4_command(opts, ctx):
    config = ctx.section("mapper")
    domain = Domain(opts.domain or config.get("domain", Domain.FOUR_SIDED_FUNDAMENTAL.value))
    if domain is Domain.THREE_SIDED:
        raise PreconditionError("map4 不支持 3 面骰子区域")
    spec = GridSpec(opts.resolution or config.get("resolution", 200), opts.kmax or config.get("kmax", 20), domain)
    records = list(sweep4(spec, ctx.jobs, ctx.kernel, ctx.cancel, ctx.progress("扫描")))
    return _map_result("map4", opts, ctx, spec, records, {})


def _family_grid(x_min, x_max, x_step):
    if x_step <= 0:
        raise PreconditionError(f"--x-step 必须为正: {x_step}")
    if x_min > x_max:
        raise PreconditionError(f"--x-min ({x_min}) 大于 --x-max ({x_max})")
    xs = []
    x = x_min
    while x <= x_max:
        xs.append(x)
        x += x_step
    return xs


def family_command(opts, ctx):
    config = ctx.section("family")
    x_min = opts.x_min if opts.x_min is not None else Fraction(config.get("x_min", 10))
    x_max = opts.x_max if opts.x_max is not None else Fraction(config.get("x_max", 200))
    x_step = opts.x_step if opts.x_step is not None else Fraction(config.get("x_step", 2))
    kmax = opts.kmax or config.get("kmax", 200)

    points = first_inversion_scan(_family_grid(x_min, x_max, x_step), kmax, ctx.jobs, ctx.kernel, ctx.cancel,
                                  ctx.progress("反转扫描"))
    monotone = is_nondecreasing(points)
    fit = None
    if opts.fit:
        fit = quadratic_fit([(p.x, p.first_inversion) for p in points if p.first_inversion is not None])

    payload = {
        "command": "family",
        "kmax": kmax,
        "points": [p.to_dict() for p in points],
        "nondecreasing": monotone,
        "fit": fit._asdict() if fit else None,
    }
    rows = [[format_rational(p.x), p.first_inversion if p.first_inversion is not None else "", p.kmax_searched]
            for p in points]
    lines = ["x,first_inversion,kmax_searched"] + [",".join(map(str, row)) for row in rows]
    lines.append(f"nondecreasing = {str(monotone).lower()}")
    if fit:
        lines += [f"{name} = {value:.9g}" for name, value in fit._asdict().items()]
    exit_code = EXIT_MISMATCH if opts.assert_monotone and not monotone else EXIT_OK
    return CommandResult(payload, lines, (["x", "first_inversion", "kmax_searched"], rows), exit_code)


def cycle_command(opts, ctx):
    entries = [(k, cycle_direction(opts.dice, k, ctx.kernel)) for k in opts.rolls]
    payload = {
        "command": "cycle",
        "dice": [str(d) for d in opts.dice],
        "rows": [{"k": k, "direction": direction} for k, direction in entries],
    }
    lines = [f"k={k} {DIRECTION_NAMES[direction]}" for k, direction in entries]
    rows = [[k, direction] for k, direction in entries]
    return CommandResult(payload, lines, (["k", "direction"], rows))


COMMANDS = {
    "compare": compare_command,
    "sequence": sequence_command,
    "tilt": tilt_command,
    "span": span_command,
    "edgeworth": edgeworth_command,
    "verify": verify_command,
    "map3": map3_command,
    "map4": map4_command,
    "family": family_command,
    "cycle": cycle_command,
}
