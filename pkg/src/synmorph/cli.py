"""Command-line pipeline: ``synmorph <subcommand> --config CONFIG``.

Every stage reads the artifacts written by the previous one, so partial reruns
only redo what changed. ``run`` executes all stages and writes a manifest with
the SHA-256 of every artifact.

Exit codes: 0 success, 1 some stage failed, 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import communities as tc
from . import compare, conllu, features, graph, metrics, morphospace, stats
from .conllu import POSTag

log = logging.getLogger("synmorph")

SUBCOMMANDS = ("census", "build", "metrics", "morphospace", "communities", "stats", "compare", "run")


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    corpora: list[tuple[str, list[Path]]]
    max_lines: int = conllu.DEFAULT_MAX_LINES
    top_k: int = 500
    excluded: tuple[str, ...] = tuple(sorted(p.value for p in graph.DEFAULT_EXCLUDED))
    modes: tuple[str, ...] = graph.MODES
    n_pcs: int = 3
    n_c: tuple[int, ...] = (2, 3, 4, 5)
    compare_clusters: int = 4
    census_threshold: int = conllu.DEFAULT_MAX_LINES
    census_grid: tuple[int, ...] = ()
    gate: bool = False
    out: Path = Path("out")
    workers: int = 1
    seed: int = 0  # reserved; every stage is deterministic
    base: Path = field(default=Path("."), repr=False)

    @classmethod
    def from_dict(cls, data: dict, base: Path = Path(".")) -> "PipelineConfig":
        known = {f.name for f in fields(cls)} - {"base"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "corpora" not in data:
            raise ConfigError("config needs a 'corpora' list")
        corpora = []
        for entry in data["corpora"]:
            if not isinstance(entry, dict) or set(entry) != {"language", "paths"}:
                raise ConfigError(f"corpus entries need exactly 'language' and 'paths': {entry!r}")
            paths = entry["paths"]
            if isinstance(paths, str):
                paths = [paths]
            corpora.append((str(entry["language"]), [base / p for p in paths]))
        langs = [c[0] for c in corpora]
        if len(set(langs)) != len(langs):
            raise ConfigError("duplicate language in corpora")
        kw = {k: v for k, v in data.items() if k != "corpora"}
        for k in ("excluded", "modes", "n_c", "census_grid"):
            if k in kw:
                kw[k] = tuple(kw[k])
        if "out" in kw:
            kw["out"] = base / kw["out"]
        cfg = cls(corpora=corpora, base=base, **kw)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data, path.parent)

    def validate(self) -> None:
        def check(cond, msg):
            if not cond:
                raise ConfigError(msg)

        check(self.corpora, "no corpora configured")
        for k in ("max_lines", "census_threshold"):
            check(isinstance(getattr(self, k), int) and getattr(self, k) >= 0, f"{k} must be an integer >= 0")
        for k in ("top_k", "n_pcs", "compare_clusters", "workers"):
            check(isinstance(getattr(self, k), int) and getattr(self, k) >= 1, f"{k} must be an integer >= 1")
        check(all(isinstance(k, int) and k >= 1 for k in self.n_c), "n_c entries must be integers >= 1")
        check(self.modes and all(m in graph.MODES for m in self.modes), f"modes must be drawn from {graph.MODES}")
        try:
            for p in self.excluded:
                POSTag(p)
        except ValueError as exc:
            raise ConfigError(f"bad excluded tag: {exc}") from None
        check(isinstance(self.gate, bool), "gate must be true or false")

    def unit_dir(self, language: str, mode: str) -> Path:
        return self.out / language / mode


# --- stages ---------------------------------------------------------------

def _write(path: Path, writer) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer(fh)


def _dump_json(path: Path, data) -> None:
    _write(path, lambda fh: fh.write(json.dumps(data, indent=1, sort_keys=True) + "\n"))


def _load_graph(d: Path) -> graph.SyntaxGraph:
    return graph.read_graphml(d / "graph.graphml")


def _load_metrics(d: Path) -> metrics.NodeMetricTable:
    with open(d / "metrics.csv", encoding="utf-8", newline="") as fh:
        return metrics.read_metric_table(fh)


def stage_census(cfg: PipelineConfig) -> conllu.CensusReport:
    report = conllu.corpus_census(cfg.corpora, cfg.census_threshold, cfg.census_grid)
    _write(cfg.out / "census.csv", report.write_csv)
    if report.curve:
        def curve(fh):
            fh.write("cutoff,languages\n")
            for c, k in report.curve.items():
                fh.write(f"{c},{k}\n")
        _write(cfg.out / "census_curve.csv", curve)
    for e in report.entries:
        if e.error:
            log.error("census %s: %s", e.language, e.error)
    return report


def stage_build(cfg: PipelineConfig, language: str, paths: list[Path]) -> None:
    sample = conllu.read_corpus(language, paths, cfg.max_lines)
    for mode in cfg.modes:
        full = graph.build_network(sample, mode, cfg.top_k, [POSTag(p) for p in cfg.excluded])
        gcc = graph.giant_component(full)
        d = cfg.unit_dir(language, mode)
        _write(d / "graph.graphml", lambda fh: graph.write_graphml(gcc, fh))
        with open(_mk(d / "nodes.csv"), "w", encoding="utf-8", newline="") as nf, \
                open(d / "edges.csv", "w", encoding="utf-8", newline="") as ef:
            graph.write_edgelist(gcc, nf, ef)
        _dump_json(d / "build.json", {
            "language": language, "mode": mode, "lines_read": sample.lines_read,
            "sentences": len(sample.sentences), "tokens": sample.token_count,
            "nodes": full.n_nodes, "edges": full.n_edges,
            "gcc_nodes": gcc.n_nodes, "gcc_edges": gcc.n_edges, "notes": list(full.notes),
        })


def _mk(path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def stage_metrics(cfg: PipelineConfig, language: str, mode: str) -> None:
    d = cfg.unit_dir(language, mode)
    table = metrics.primary_matrix(_load_graph(d))
    _write(d / "metrics.csv", table.write_csv)


def stage_morphospace(cfg: PipelineConfig, language: str, mode: str) -> None:
    d = cfg.unit_dir(language, mode)
    g, table = _load_graph(d), _load_metrics(d)
    feats = features.neighbor_stats(g, table)
    z, st = features.standardize(feats)
    model = morphospace.fit_pca(z, st)
    scores = morphospace.project(model, z)
    _write(d / "features.csv", feats.write_csv)
    _write(d / "standardizer.json", st.dump)
    _write(d / "model.json", model.dump)
    _write(d / "scores.csv", scores.write_csv)
    rgb = morphospace.rgb_colors(scores)
    _write(d / "colors.csv", lambda fh: morphospace.write_colors(fh, scores.keys, rgb))


def stage_communities(cfg: PipelineConfig, language: str, mode: str) -> None:
    d = cfg.unit_dir(language, mode)
    table = _load_metrics(d)
    with open(d / "scores.csv", encoding="utf-8", newline="") as fh:
        scores = morphospace.ScoreMatrix.read_csv(fh)
    dendro = tc.ward_dendrogram(scores, cfg.n_pcs)
    _write(d / "dendrogram.csv", dendro.write_csv)
    labels = [str(k) for k in scores.keys]
    _write(d / "dendrogram.nwk", lambda fh: fh.write(dendro.newick(labels) + "\n"))
    for k in cfg.n_c:
        if k > len(scores.keys):
            log.warning("%s/%s: n_c=%d exceeds %d nodes, skipped", language, mode, k, len(scores.keys))
            continue
        a = tc.label_communities(tc.cut_assignment(dendro, k), table)
        _write(d / f"assignment_nc{k}.csv", lambda fh: a.write_csv(fh, scores.keys))


def _nan_to_none(x):
    x = float(x)
    return None if np.isnan(x) else x


def stage_stats(cfg: PipelineConfig, language: str, mode: str) -> None:
    d = cfg.unit_dir(language, mode)
    g, table = _load_graph(d), _load_metrics(d)
    bundle: dict = {"language": language, "mode": mode}
    pos = stats.assortativity_report(g, table, "POS")
    _write(d / "assortativity_pos.csv", pos.write_csv)
    bundle["assortativity_pos"] = _assort_json(pos)
    bundle["by_n_c"] = {}
    for k in cfg.n_c:
        path = d / f"assignment_nc{k}.csv"
        if not path.exists():
            continue
        with open(path, encoding="utf-8", newline="") as fh:
            a = tc.CommunityAssignment.read_csv(fh)
        entry: dict = {"sizes": a.sizes(), "names": [a.names[i] for i in range(a.n_c)]}
        comp = stats.composition_table(a, [key.upos for key in g.keys])
        _write(d / f"composition_nc{k}.csv", comp.write_csv)
        h, s = stats.entropies(comp)
        _write(d / f"entropies_nc{k}.csv", lambda fh: stats.write_entropies_csv(fh, h, s))
        links = stats.link_fractions(g, a)
        with open(d / f"links_fl_nc{k}.csv", "w", encoding="utf-8", newline="") as f1, \
                open(d / f"links_fk_nc{k}.csv", "w", encoding="utf-8", newline="") as f2:
            links.write_csv(f1, f2)
        entry["composition"] = {"pos": [p.value for p in comp.pos_classes],
                                "counts": comp.counts.tolist()}
        entry["entropy_H"], entry["entropy_S"] = h, s
        entry["links"] = {"l": links.l.tolist(), "k": links.k.tolist(), "n_edges": links.n_edges}
        if k >= 2:
            rep = stats.assortativity_report(g, table, "TC", a)
            _write(d / f"assortativity_tc_nc{k}.csv", rep.write_csv)
            entry["assortativity_tc"] = _assort_json(rep)
            anova = stats.anova_table(g, table, a)
            _write(d / f"anova_nc{k}.csv", lambda fh: stats.write_anova_csv(fh, anova))
            entry["anova"] = {m: {grp: r._asdict() for grp, r in res.items()} for m, res in anova.items()}
        bundle["by_n_c"][str(k)] = entry
    _dump_json(d / "stats.json", _jsonable(bundle))


def _assort_json(rep: stats.AssortativityReport) -> dict:
    return {
        "groups": {n: (rep.lines[n]._asdict() if n in rep.lines else None) for n in rep.sizes},
        "sizes": rep.sizes, "skipped": rep.skipped,
        "overall": rep.overall._asdict() if rep.overall else None,
    }


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if np.isnan(x):
            return None
        if np.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, np.integer):
        return int(x)
    return x


def stage_compare(cfg: PipelineConfig, languages: list[str]) -> list[str]:
    """Profiles for every built unit, then per-mode comparison. Returns failure messages."""
    failures = []
    profiles = []
    for lang in languages:
        for mode in cfg.modes:
            d = cfg.unit_dir(lang, mode)
            if not (d / "metrics.csv").exists():
                continue
            g = _load_graph(d)
            profiles.append(compare.mean_properties(_load_metrics(d), lang, mode,
                                                    stats.mean_neighbor_degree(g)))
    _write(cfg.out / "profiles.csv", lambda fh: compare.write_profiles_csv(fh, profiles))
    for mode in cfg.modes:
        group = [p for p in profiles if p.mode == mode]
        if len(group) < 3:
            log.warning("compare/%s: %d profiles, need 3; skipped", mode, len(group))
            continue
        try:
            res = compare.compare_languages(group, cfg.compare_clusters)
        except Exception as exc:  # recorded, other modes continue
            failures.append(f"compare/{mode}: {exc}")
            continue
        d = cfg.out / "compare" / mode
        _write(d / "scores.csv", res.write_scores_csv)
        _write(d / "clusters.csv", res.write_clusters_csv)
        _write(d / "dendrogram.nwk", lambda fh: fh.write(res.dendrogram.newick(res.languages) + "\n"))
        _write(d / "dendrogram.csv", res.dendrogram.write_csv)
        _write(d / "model.json", res.model.dump)
    return failures


PER_UNIT = {
    "metrics": stage_metrics,
    "morphospace": stage_morphospace,
    "communities": stage_communities,
    "stats": stage_stats,
}


def _language_job(cfg: PipelineConfig, language: str, paths: list[Path], stages: tuple[str, ...]) -> list[str]:
    """Run the requested stages for one language; failures are returned, not raised."""
    failures = []
    if "build" in stages:
        try:
            stage_build(cfg, language, paths)
        except Exception as exc:
            return [f"{language}/build: {exc}"]
    for mode in cfg.modes:
        for name in stages:
            if name == "build":
                continue
            try:
                PER_UNIT[name](cfg, language, mode)
            except Exception as exc:
                failures.append(f"{language}/{mode}/{name}: {exc}")
                break
    return failures


def run_languages(cfg: PipelineConfig, stages: tuple[str, ...], languages=None) -> list[str]:
    jobs = [(lang, paths) for lang, paths in cfg.corpora if languages is None or lang in languages]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            results = list(ex.map(_language_job, [cfg] * len(jobs), *zip(*jobs), [stages] * len(jobs)))
    else:
        results = [_language_job(cfg, lang, paths, stages) for lang, paths in jobs]
    return [f for r in results for f in r]


def write_manifest(cfg: PipelineConfig, failures: list[str]) -> Path:
    out = cfg.out
    arts = []
    for p in sorted(out.rglob("*")):
        if p.is_file() and p.name != "manifest.json":
            arts.append({"path": p.relative_to(out).as_posix(),
                         "sha256": hashlib.sha256(p.read_bytes()).hexdigest()})
    path = out / "manifest.json"
    _dump_json(path, {"artifacts": arts, "failures": sorted(failures)})
    return path


def run_pipeline(cfg: PipelineConfig) -> list[str]:
    """Full pipeline; returns the list of recorded stage failures."""
    report = stage_census(cfg)
    failures = [f"{e.language}/census: {e.error}" for e in report.entries if e.error]
    languages = [e.language for e in report.entries if e.error is None and (e.passed or not cfg.gate)]
    failures += run_languages(cfg, ("build",) + tuple(PER_UNIT), set(languages))
    failures += stage_compare(cfg, languages)
    write_manifest(cfg, failures)
    return failures


# --- entry point ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="synmorph", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="pipeline JSON config")
        p.add_argument("--language", action="append", help="restrict to this language (repeatable)")
        p.add_argument("--mode", choices=graph.MODES, help="restrict to one network mode")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--workers", type=int, help="parallel languages (overrides config)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = PipelineConfig.load(args.config)
        over = {}
        if args.out:
            over["out"] = Path(args.out)
        if args.workers is not None:
            over["workers"] = args.workers
        if args.mode:
            over["modes"] = (args.mode,)
        if args.language:
            known = {c[0] for c in cfg.corpora}
            missing = set(args.language) - known
            if missing:
                raise ConfigError(f"languages not in config: {sorted(missing)}")
            over["corpora"] = [c for c in cfg.corpora if c[0] in set(args.language)]
        cfg = replace(cfg, **over)
        cfg.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    cmd = args.command
    if cmd == "census":
        report = stage_census(cfg)
        failures = [f"{e.language}: {e.error}" for e in report.entries if e.error]
    elif cmd == "run":
        failures = run_pipeline(cfg)
    elif cmd == "compare":
        failures = stage_compare(cfg, [c[0] for c in cfg.corpora])
    else:
        failures = run_languages(cfg, (cmd,))
    for f in failures:
        print(f"failed: {f}", file=sys.stderr)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
