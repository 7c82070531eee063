"""Command-line front end: dataset generation, condition runs, oracle checks.

Exit codes: 0 ok, 1 usage error, 2 data error, 3 internal inconsistency
(a soundness violation, which aborts instead of being repaired).
"""

from __future__ import annotations

import csv
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import click

from . import oracle
from .conditions import (
    ALL_CONDITIONS,
    DEFAULT_CONDITIONS,
    PipelineConfig,
    RunStats,
    SoundnessError,
    run_joint,
)
from .instance import (
    draw_values,
    generate_ground_truth,
    ingest_ego_network,
    load_instance,
    load_partial,
    read_edge_list,
    save_instance,
    save_partial,
)
from .rng import SplitMix64, derive_seed

STATS_FIELDS = [
    "instance",
    "n",
    "alpha",
    "p_edges",
    "seed",
    "rounds",
    "merged_classes",
    "fixed_zero",
    "fixed_one",
    "percent_fixed",
    "total_ns",
]
for _cond in ALL_CONDITIONS:
    STATS_FIELDS += [f"{_cond}_zero", f"{_cond}_one", f"{_cond}_ns"]

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INCONSISTENT = 3


def _stats_row(name: str, stats: RunStats, meta: dict | None = None) -> dict:
    row = {field: "" for field in STATS_FIELDS}
    row.update(
        instance=name,
        n=stats.n,
        rounds=stats.rounds,
        merged_classes=stats.merged_classes,
        fixed_zero=stats.fixed_zero,
        fixed_one=stats.fixed_one,
        percent_fixed=f"{stats.percent_fixed:.6f}",
        total_ns=stats.total_ns,
    )
    if meta:
        row.update({k: v for k, v in meta.items() if k in row})
    for cond, rec in stats.per_condition.items():
        row[f"{cond}_zero"] = rec.fixed_zero
        row[f"{cond}_one"] = rec.fixed_one
        row[f"{cond}_ns"] = rec.time_ns
    return row


def _parse_conditions(text: str | None) -> tuple[str, ...]:
    if not text:
        return DEFAULT_CONDITIONS
    conditions = tuple(part.strip() for part in text.split(",") if part.strip())
    for cond in conditions:
        if cond not in ALL_CONDITIONS:
            raise click.UsageError(
                f"unknown condition {cond!r}; choose from {', '.join(ALL_CONDITIONS)}"
            )
    return conditions


def _manifest_meta(path: Path) -> dict:
    """Echo generator parameters from a sibling manifest.csv, when present."""
    manifest = path.parent / "manifest.csv"
    if not manifest.exists():
        return {}
    with manifest.open() as fh:
        for row in csv.DictReader(fh):
            if row.get("instance") == path.name:
                return {
                    "alpha": row.get("alpha", ""),
                    "p_edges": row.get("p_edges", ""),
                    "seed": row.get("value_seed", row.get("seed", "")),
                }
    return {}


def _run_one(args) -> tuple[str, dict, dict | None]:
    path, cfg, emit_dir = args
    instance = load_instance(path)
    name = Path(path).name
    pa, _, stats = run_joint(instance, cfg)
    if emit_dir is not None:
        out = Path(emit_dir) / (Path(path).stem + ".partial.csv")
        save_partial(pa, out)
    return name, _stats_row(name, stats, _manifest_meta(Path(path))), None


@click.group()
def main():
    """Partial-optimality preprocessing for preordering instances."""


@main.command()
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--n", "n", type=int, default=20, show_default=True)
@click.option("--alpha", type=float, default=0.5, show_default=True)
@click.option("--p-edges", type=float, default=0.5, show_default=True)
@click.option("--truths", type=int, default=5, show_default=True, help="ground truths per setting")
@click.option("--count", type=int, default=20, show_default=True, help="value draws per truth")
@click.option("--seed", type=int, default=0, show_default=True)
def generate(out_dir, n, alpha, p_edges, truths, count, seed):
    """Write an ensemble of synthetic instances plus a manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest_path = out / "manifest.csv"
    rows = []
    for t in range(truths):
        truth_seed = derive_seed(seed, t)
        truth = generate_ground_truth(n, p_edges, SplitMix64(truth_seed))
        for k in range(count):
            value_seed = derive_seed(seed, t, k)
            instance = draw_values(truth, alpha, SplitMix64(value_seed))
            name = f"synthetic_n{n}_a{alpha:g}_p{p_edges:g}_t{t}_k{k}.csv"
            save_instance(instance, out / name)
            rows.append(
                {
                    "instance": name,
                    "n": n,
                    "alpha": alpha,
                    "p_edges": p_edges,
                    "truth_seed": truth_seed,
                    "value_seed": value_seed,
                }
            )
    with manifest_path.open("w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["instance", "n", "alpha", "p_edges", "truth_seed", "value_seed"]
        )
        writer.writeheader()
        writer.writerows(rows)
    click.echo(f"wrote {len(rows)} instances to {out}")


def _quantiles(values: list[float]) -> tuple[float, float, float]:
    med = statistics.median(values)
    q = statistics.quantiles(values, n=4) if len(values) > 1 else [med, med, med]
    return q[0], med, q[2]


@main.command()
@click.argument("instances", nargs=-1, type=click.Path(exists=True, dir_okay=False))
@click.option("--conditions", "conditions_text", default=None, help="comma-separated condition ids")
@click.option("--rounds", type=int, default=None, help="cap on fixpoint rounds")
@click.option("--single-pass", is_flag=True, help="one pass per condition, no fixpoint")
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--emit-partial", "emit_dir", type=click.Path(file_okay=False), default=None)
@click.option("--out", "out_csv", type=click.Path(dir_okay=False), default=None)
def fix(instances, conditions_text, rounds, single_pass, threads, emit_dir, out_csv):
    """Run the condition pipeline on instance files and report stats rows."""
    if not instances:
        raise click.UsageError("no instance files given")
    cfg = PipelineConfig(
        conditions=_parse_conditions(conditions_text),
        max_rounds=rounds,
        single_pass=single_pass,
    )
    if emit_dir is not None:
        Path(emit_dir).mkdir(parents=True, exist_ok=True)
    jobs = [(path, cfg, emit_dir) for path in instances]
    rows = []
    try:
        if threads > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                for name, row, _ in pool.map(_run_one, jobs):
                    rows.append(row)
                    click.echo(f"{name}: {row['percent_fixed']}% fixed")
        else:
            for job in jobs:
                name, row, _ = _run_one(job)
                rows.append(row)
                click.echo(f"{name}: {row['percent_fixed']}% fixed")
    except SoundnessError as exc:
        click.echo(f"soundness violation: {exc}", err=True)
        sys.exit(EXIT_INCONSISTENT)
    except ValueError as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(EXIT_DATA)

    if out_csv is not None:
        path = Path(out_csv)
        write_header = not path.exists()
        with path.open("a", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=STATS_FIELDS)
            if write_header:
                writer.writeheader()
            writer.writerows(rows)
    if len(rows) > 1:
        fixed = [float(r["percent_fixed"]) for r in rows]
        q25, med, q75 = _quantiles(fixed)
        click.echo(f"percent fixed: median {med:.2f} (q25 {q25:.2f}, q75 {q75:.2f})")


@main.command("oracle-check")
@click.argument("instance_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--conditions", "conditions_text", default=None)
@click.option("--partial", "partial_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="certify a stored partial assignment instead of running the pipeline")
def oracle_check(instance_path, conditions_text, partial_path):
    """Certify pipeline fixations against the exhaustive oracle (n <= 6)."""
    try:
        instance = load_instance(instance_path)
    except ValueError as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(EXIT_DATA)
    if instance.n > oracle.MAX_ORACLE_N:
        click.echo(f"oracle check needs n <= {oracle.MAX_ORACLE_N}, got {instance.n}", err=True)
        sys.exit(EXIT_USAGE)
    if partial_path is not None:
        pa = load_partial(partial_path, instance.n)
    else:
        cfg = PipelineConfig(conditions=_parse_conditions(conditions_text))
        try:
            pa, _, _ = run_joint(instance, cfg)
        except SoundnessError as exc:
            click.echo(f"soundness violation: {exc}", err=True)
            sys.exit(EXIT_INCONSISTENT)
    if oracle.certify(instance, pa):
        optima = oracle.solve_exact(instance)
        witness = next(
            m for m in optima.matrices if oracle.completion_mask(m[None], pa)[0]
        )
        arcs = [(int(p), int(q)) for p, q in zip(*witness.nonzero())]
        click.echo(f"certified: optimum value {optima.value:g} with arcs {arcs}")
        sys.exit(0)
    optima = oracle.solve_exact(instance)
    for p, q, v in pa.domain_pairs():
        if not any(int(m[p, q]) == v for m in optima.matrices):
            click.echo(f"unsound fixation: pair ({p}, {q}) = {v}", err=True)
            break
    sys.exit(EXIT_INCONSISTENT)


@main.command("ingest-ego")
@click.argument("edge_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_csv", type=click.Path(dir_okay=False), required=True)
def ingest_ego(edge_file, out_csv):
    """Convert a "src dst" edge list into an instance file."""
    try:
        nodes, edges = read_edge_list(edge_file)
        instance = ingest_ego_network(edges, nodes)
    except ValueError as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(EXIT_DATA)
    save_instance(instance, out_csv)
    click.echo(f"{len(nodes)} nodes, {len(edges)} edges -> {out_csv}")


if __name__ == "__main__":
    main()
