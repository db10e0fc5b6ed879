"""Generator specs, labelled datasets, presets and the on-disk dataset layout.

Layout of a dataset directory::

    manifest.json          specs, seeds and per-instance file names
    graphs/00000.graph     "n m" header, then one "i j" line per edge (i < j)
    graphs/00000.cent      one line per vertex: degree betweenness closeness eigenvector

Centrality sidecars hold the normalized values with 17 significant digits;
``nan`` marks a measure that could not be computed.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import generators as gen
from .errors import ConvergenceError, GenerationError, InputError
from .graph import Graph
from .oracles import MEASURES, all_centralities, centrality

MANIFEST_VERSION = 1
MAX_REGENERATIONS = 100

# training distributions
TRAIN_FAMILIES = {
    "erdos-renyi": {"p": 0.25},
    "powerlaw-tree": {"gamma": 3.0},
    "watts-strogatz": {"k": 4, "p": 0.25},
    "holme-kim": {"m": 4, "p": 0.1},
}
DIFFERENT_FAMILIES = {
    "barabasi-albert": {"m": 4},
    "shell": {},
}
SIZES = tuple(range(32, 257, 16))


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    params: dict = field(default_factory=dict)
    n_range: tuple[int, int] = (32, 128)
    count: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.family not in gen.FAMILIES:
            raise InputError(f"unknown graph family {self.family!r}; expected one of {gen.FAMILIES}")
        lo, hi = self.n_range
        if lo < 4 or hi < lo:
            raise InputError(f"invalid n_range {self.n_range}; need 4 <= lo <= hi")
        if self.count < 1:
            raise InputError("count must be at least 1")

    def to_json(self) -> dict:
        d = asdict(self)
        d["n_range"] = list(self.n_range)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "GeneratorSpec":
        return cls(d["family"], dict(d.get("params", {})), tuple(d["n_range"]), int(d["count"]), int(d["seed"]))


def generate_graph(family: str, n: int, params: dict, rng) -> Graph:
    p = dict(params)
    if family == "erdos-renyi":
        return gen.erdos_renyi(n, p.get("p", 0.25), rng)
    if family == "powerlaw-tree":
        return gen.powerlaw_tree(n, p.get("gamma", 3.0), rng, int(p.get("tries", 10_000)))
    if family == "watts-strogatz":
        return gen.connected_watts_strogatz(n, int(p.get("k", 4)), p.get("p", 0.25), int(p.get("tries", 100)), rng)
    if family == "holme-kim":
        return gen.holme_kim(n, int(p.get("m", 4)), p.get("p", 0.1), rng)
    if family == "barabasi-albert":
        return gen.barabasi_albert(n, int(p.get("m", 4)), rng)
    if family == "shell":
        return gen.shell_graph(n, rng)
    raise InputError(f"unknown graph family {family!r}")


@dataclass
class Instance:
    graph: Graph
    values: dict[str, np.ndarray]  # normalized centralities
    source: str = ""
    _raw: dict = field(default_factory=dict, repr=False)

    def raw(self, measure: str) -> np.ndarray:
        """Unnormalized centrality (AU targets), computed on first use."""
        if measure not in self._raw:
            self._raw[measure] = centrality(self.graph, measure, normalized=False).values
        return self._raw[measure]

    def target(self, measure: str, normalized: bool = True) -> np.ndarray:
        return self.values[measure] if normalized else self.raw(measure)


@dataclass
class Dataset:
    name: str
    instances: list[Instance]
    provenance: list = field(default_factory=list)

    def __len__(self):
        return len(self.instances)

    def __getitem__(self, k):
        return self.instances[k]

    def __iter__(self):
        return iter(self.instances)

    def subset(self, indices: Sequence[int], name: str | None = None) -> "Dataset":
        return Dataset(name or self.name, [self.instances[i] for i in indices], self.provenance)

    def by_size(self) -> dict[int, "Dataset"]:
        groups: dict[int, list[Instance]] = {}
        for inst in self.instances:
            groups.setdefault(inst.graph.n, []).append(inst)
        return {n: Dataset(f"{self.name}[n={n}]", groups[n], self.provenance) for n in sorted(groups)}


def _draw_n(spec: GeneratorSpec, rng) -> int:
    lo, hi = spec.n_range
    return int(rng.integers(lo, hi + 1))


def build_instance(spec: GeneratorSpec, index: int, oracle: Callable = all_centralities) -> Instance:
    """Instance ``index`` of ``spec``; depends only on (spec, index).

    Eigenvector non-convergence discards the graph and regenerates it from the
    next attempt's seed.
    """
    for attempt in range(MAX_REGENERATIONS):
        rng = np.random.default_rng([spec.seed, index, attempt])
        n = _draw_n(spec, rng)
        if spec.family == "shell":
            # shell totals are quantized; resample until the order is in range
            for _ in range(1000):
                if spec.n_range[0] <= gen.shell_sizes_total(n) <= spec.n_range[1]:
                    break
                n = _draw_n(spec, rng)
            else:
                raise GenerationError(f"no shell graph order inside n_range {spec.n_range}")
        try:
            g = generate_graph(spec.family, n, spec.params, rng)
        except GenerationError as exc:
            raise GenerationError(f"{spec.family} (seed={spec.seed}, instance {index}): {exc}") from exc
        try:
            values = oracle(g)
        except ConvergenceError:
            continue
        return Instance(g, values, source=f"{spec.family}#{index}")
    raise GenerationError(f"{spec.family} instance {index}: eigenvector centrality kept failing")


def _build_star(args):
    return build_instance(*args)


def generate_dataset(
    specs: Sequence[GeneratorSpec],
    name: str = "custom",
    oracle: Callable = all_centralities,
    workers: int = 1,
) -> Dataset:
    """Generate ``spec.count`` labelled instances per spec, in spec order."""
    jobs = [(spec, k, oracle) for spec in specs for k in range(spec.count)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            instances = list(pool.map(_build_star, jobs, chunksize=16))
    else:
        instances = [build_instance(*job) for job in jobs]
    return Dataset(name, instances, [s.to_json() for s in specs])


def preset_specs(name: str, seed: int = 0, count: int | None = None) -> list[GeneratorSpec]:
    """Specs for the named evaluation datasets.

    ``count`` overrides the per-family (per size, for ``sizes``) instance count.
    """
    def mk(fams, n_range, default, offset):
        return [
            GeneratorSpec(f, dict(p), n_range, count or default, seed * 1000 + offset + k)
            for k, (f, p) in enumerate(fams.items())
        ]

    if name == "train":
        return mk(TRAIN_FAMILIES, (32, 128), 4096, 0)
    if name == "test":
        return mk(TRAIN_FAMILIES, (32, 128), 4096, 100)
    if name == "large":
        return mk(TRAIN_FAMILIES, (128, 512), 256, 200)
    if name == "different":
        return mk(DIFFERENT_FAMILIES, (32, 128), 4096, 300)
    if name == "sizes":
        specs = []
        for s_idx, size in enumerate(SIZES):
            specs += mk(TRAIN_FAMILIES, (size, size), 128, 400 + 10 * s_idx)
        return specs
    if name == "desk":
        fams = {f: TRAIN_FAMILIES[f] for f in ("erdos-renyi", "powerlaw-tree")}
        return mk(fams, (16, 32), 100, 500)
    if name == "desk-mixed":
        return mk(TRAIN_FAMILIES, (16, 32), 50, 700)
    if name == "desk-test":
        fams = {f: TRAIN_FAMILIES[f] for f in ("erdos-renyi", "powerlaw-tree")}
        return mk(fams, (16, 32), 25, 600)
    raise InputError(f"unknown preset {name!r}")


PRESETS = ("train", "test", "large", "different", "sizes", "desk", "desk-mixed", "desk-test")


# -- serialization --------------------------------------------------------------


def format_centralities(values: dict[str, np.ndarray], n: int) -> str:
    cols = [np.asarray(values.get(m, np.full(n, np.nan)), dtype=np.float64) for m in MEASURES]
    lines = [" ".join(f"{c[i]:.17g}" for c in cols) for i in range(n)]
    return "\n".join(lines) + "\n"


def parse_centralities(text: str, n: int) -> dict[str, np.ndarray]:
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if len(rows) != n or any(len(r) != len(MEASURES) for r in rows):
        raise InputError(f"centrality sidecar must have {n} rows of {len(MEASURES)} columns")
    arr = np.array([[float(x) for x in r] for r in rows], dtype=np.float64)
    return {m: arr[:, k] for k, m in enumerate(MEASURES) if not np.all(np.isnan(arr[:, k]))}


def save_dataset(ds: Dataset, directory, extra: dict | None = None) -> Path:
    directory = Path(directory)
    (directory / "graphs").mkdir(parents=True, exist_ok=True)
    files = []
    for k, inst in enumerate(ds.instances):
        stem = f"graphs/{k:05d}"
        (directory / f"{stem}.graph").write_text(inst.graph.to_text())
        (directory / f"{stem}.cent").write_text(format_centralities(inst.values, inst.graph.n))
        files.append({"graph": f"{stem}.graph", "centralities": f"{stem}.cent", "source": inst.source})
    manifest = {
        "version": MANIFEST_VERSION,
        "name": ds.name,
        "specs": ds.provenance,
        "instances": files,
    }
    if extra:
        manifest.update(extra)
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return directory


def append_instance(directory, inst: Instance, name: str = "real") -> str:
    """Add one instance to a dataset directory, creating it if needed.

    Returns the stem of the written files.
    """
    directory = Path(directory)
    path = directory / "manifest.json"
    if path.exists():
        manifest = json.loads(path.read_text())
        if manifest.get("version") != MANIFEST_VERSION:
            raise InputError(f"unsupported dataset manifest version {manifest.get('version')}")
    else:
        manifest = {"version": MANIFEST_VERSION, "name": name, "specs": [], "instances": []}
    (directory / "graphs").mkdir(parents=True, exist_ok=True)
    stem = f"graphs/{len(manifest['instances']):05d}"
    (directory / f"{stem}.graph").write_text(inst.graph.to_text())
    (directory / f"{stem}.cent").write_text(format_centralities(inst.values, inst.graph.n))
    manifest["instances"].append({"graph": f"{stem}.graph", "centralities": f"{stem}.cent", "source": inst.source})
    path.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return stem


def load_dataset(directory) -> Dataset:
    directory = Path(directory)
    path = directory / "manifest.json"
    if not path.exists():
        raise InputError(f"no dataset manifest at {path}")
    manifest = json.loads(path.read_text())
    if manifest.get("version") != MANIFEST_VERSION:
        raise InputError(f"unsupported dataset manifest version {manifest.get('version')}")
    instances = []
    for entry in manifest["instances"]:
        g = Graph.from_text((directory / entry["graph"]).read_text())
        values = parse_centralities((directory / entry["centralities"]).read_text(), g.n)
        instances.append(Instance(g, values, source=entry.get("source", "")))
    return Dataset(manifest.get("name", directory.name), instances, manifest.get("specs", []))


def summarize(ds: Dataset) -> str:
    ns = np.array([i.graph.n for i in ds.instances])
    ms = np.array([i.graph.m for i in ds.instances])
    if not len(ns):
        return f"{ds.name}: empty"
    return (
        f"{ds.name}: {len(ds)} instances, n in [{ns.min()}, {ns.max()}] (mean {ns.mean():.1f}), "
        f"m in [{ms.min()}, {ms.max()}] (mean {ms.mean():.1f})"
    )


__all__ = [
    "GeneratorSpec",
    "Instance",
    "Dataset",
    "generate_dataset",
    "build_instance",
    "preset_specs",
    "save_dataset",
    "load_dataset",
    "append_instance",
    "PRESETS",
    "SIZES",
]
