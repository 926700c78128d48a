"""Seeded synthetic ego networks for human-like and bot-like accounts.

Humans follow a log-normally sized repertoire drawn from a few communities;
alters follow each other densely inside communities and preferentially
across them, some follow the ego back, and each alter follows a pool of
second-step accounts where popular accounts attract more followers. Bots
either wire the same sizes uniformly at random (``bot_random``), replay one
fixed template under fresh labels (``bot_clone``) or follow a single
account (``bot_star``).

With a positive ``heterogeneity`` every account draws its own follow,
reciprocity and account-reuse probabilities from Beta distributions
centred on the profile values, so the populations overlap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .corpus import CorpusRecord, format_number, write_manifest
from .errors import EnvironmentFault
from .graph import DirectedGraph, EgoNetwork, format_edge_list

PROFILE_KINDS = ("human", "bot_random", "bot_clone", "bot_star")

# each alter's expected number of follows into other communities
_CROSS_FOLLOW_MEAN = 1.0
# mean chance that a second-step follow opens a new account rather than reusing one
_NEW_ACCOUNT_PROB = 0.5


@dataclass(frozen=True)
class GeneratorProfile:
    kind: str
    repertoire_mean: float = 40.0
    repertoire_dispersion: float = 0.6
    community_count: int = 4
    intra_community_follow_prob: float = 0.3
    reciprocity_prob: float = 0.3
    alter_expansion_mean: float = 30.0
    preferential_attachment_strength: float = 1.0
    # Beta concentration for per-account follow, reciprocity and reuse probabilities; 0 disables
    # jitter. When on, each human also draws its community count from 1..community_count.
    heterogeneity: float = 0.0
    template_seed: int = 0

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        for name in ("intra_community_follow_prob", "reciprocity_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.community_count < 1:
            raise ValueError("community_count must be >= 1")
        if self.repertoire_mean <= 0:
            raise ValueError("repertoire_mean must be > 0")
        if self.repertoire_dispersion < 0 or self.alter_expansion_mean < 0:
            raise ValueError("dispersion and expansion mean must be >= 0")
        if self.preferential_attachment_strength < 0:
            raise ValueError("preferential_attachment_strength must be >= 0")
        if self.heterogeneity < 0:
            raise ValueError("heterogeneity must be >= 0")


PROFILE_FIELDS = tuple(f.name for f in fields(GeneratorProfile))


def default_profiles() -> dict:
    from .config import load_config

    return load_config().profiles


@dataclass
class SynthConfig:
    counts: dict
    profiles: dict = field(default_factory=dict)
    score_noise_sd: float = 0.35
    score_flip_prob: float = 0.05
    seed: int = 7
    output_dir: Path = Path("corpus")

    def __post_init__(self):
        for kind, c in self.counts.items():
            if kind not in PROFILE_KINDS:
                raise ValueError(f"unknown profile kind {kind!r}")
            if c < 0:
                raise ValueError(f"negative count for {kind}")
        total = sum(self.counts.values())
        humans = self.counts.get("human", 0)
        if total < 2 or humans == 0 or humans == total:
            raise ValueError("corpus needs at least 2 records with both labels present")
        if self.score_noise_sd < 0:
            raise ValueError("score_noise_sd must be >= 0")
        if not 0.0 <= self.score_flip_prob <= 1.0:
            raise ValueError("score_flip_prob must lie in [0, 1]")


def _repertoire_size(rng, profile) -> int:
    s = profile.repertoire_dispersion
    mu = math.log(profile.repertoire_mean) - s * s / 2
    return max(1, int(round(rng.lognormal(mu, s))))


def _jitter(rng, p, concentration):
    """Per-account probability around ``p``: Beta with mean ``p`` when ``concentration > 0``."""
    if concentration <= 0 or p <= 0 or p >= 1:
        return p
    return float(rng.beta(p * concentration, (1 - p) * concentration))


def _weighted_choice(rng, weights):
    total = weights.sum()
    if total <= 0:
        return int(rng.integers(len(weights)))
    return int(rng.choice(len(weights), p=weights / total))


def _second_step(rng, alters, profile, edges):
    """Each alter follows a Poisson number of second-step accounts.

    Reused accounts are picked with weight ``indegree ** strength``; strength 0 is uniform.
    """
    p_new = _jitter(rng, _NEW_ACCOUNT_PROB, profile.heterogeneity)
    indeg = []
    for a in alters:
        k = rng.poisson(profile.alter_expansion_mean)
        chosen = set()
        for _ in range(k):
            if not indeg or rng.random() < p_new:
                target = len(indeg)
                indeg.append(0)
            elif profile.preferential_attachment_strength > 0:
                w = np.asarray(indeg, dtype=float) ** profile.preferential_attachment_strength
                target = _weighted_choice(rng, w)
            else:
                target = int(rng.integers(len(indeg)))
            if target in chosen:
                continue
            chosen.add(target)
            indeg[target] += 1
            edges.append((a, f"s{target}"))


def _human(rng, profile):
    d = _repertoire_size(rng, profile)
    alters = [f"a{i}" for i in range(d)]
    blocks = profile.community_count
    if profile.heterogeneity > 0:
        blocks = int(rng.integers(1, blocks + 1))
    block = rng.integers(blocks, size=d)
    edges = [("ego", a) for a in alters]
    p_follow = _jitter(rng, profile.intra_community_follow_prob, profile.heterogeneity)
    p_back = _jitter(rng, profile.reciprocity_prob, profile.heterogeneity)
    mask = (rng.random((d, d)) < p_follow) & (block[:, None] == block[None, :])
    np.fill_diagonal(mask, False)
    for i, j in zip(*np.nonzero(mask)):
        edges.append((alters[i], alters[j]))
    indeg = mask.sum(axis=0).astype(float)
    for i in range(d):
        others = np.flatnonzero(block != block[i])
        if others.size == 0:
            continue
        for _ in range(rng.poisson(_CROSS_FOLLOW_MEAN)):
            w = (indeg[others] + 1.0) ** profile.preferential_attachment_strength
            j = others[_weighted_choice(rng, w)]
            edges.append((alters[i], alters[j]))
            indeg[j] += 1
    for a in alters:
        if rng.random() < p_back:
            edges.append((a, "ego"))
    _second_step(rng, alters, profile, edges)
    return edges


def _random(rng, profile):
    d = _repertoire_size(rng, profile)
    alters = [f"a{i}" for i in range(d)]
    edges = [("ego", a) for a in alters]
    p_follow = _jitter(rng, profile.intra_community_follow_prob, profile.heterogeneity)
    p_back = _jitter(rng, profile.reciprocity_prob, profile.heterogeneity)
    if d > 1:
        mask = rng.random((d, d)) < p_follow
        np.fill_diagonal(mask, False)
        for i, j in zip(*np.nonzero(mask)):
            edges.append((alters[i], alters[j]))
    for a in alters:
        if rng.random() < p_back:
            edges.append((a, "ego"))
    _second_step(rng, alters, profile, edges)
    return edges


def _relabel(edges, rng):
    """Fresh opaque labels in a seeded order; the ego keeps its role."""
    names = sorted({v for e in edges for v in e} - {"ego"})
    perm = rng.permutation(len(names))
    mapping = {v: f"v{int(k)}" for v, k in zip(names, perm)}
    mapping["ego"] = "ego"
    return [(mapping[u], mapping[v]) for u, v in edges]


def generate_ego_network(profile: GeneratorProfile, seed) -> EgoNetwork:
    rng = np.random.default_rng(seed)
    if profile.kind == "human":
        edges = _human(rng, profile)
    elif profile.kind == "bot_random":
        edges = _random(rng, profile)
    elif profile.kind == "bot_clone":
        template = _random(np.random.default_rng(profile.template_seed), profile)
        edges = _relabel(template, rng)
    else:
        edges = [("ego", "v0")]
    return EgoNetwork(DirectedGraph(["ego"], edges), "ego")


def generate_external_scores(labels, noise_sd, flip_prob, seed) -> np.ndarray:
    """Noisy stand-in for a third-party bot score: clamp(target + N(0, sd)) with random target flips."""
    if noise_sd < 0:
        raise ValueError("noise_sd must be >= 0")
    if not 0.0 <= flip_prob <= 1.0:
        raise ValueError("flip_prob must lie in [0, 1]")
    labels = np.asarray(labels, dtype=float)
    rng = np.random.default_rng(seed)
    flip = rng.random(labels.size) < flip_prob
    target = np.where(flip, 1.0 - labels, labels)
    noise = rng.normal(0.0, noise_sd, labels.size) if noise_sd > 0 else np.zeros(labels.size)
    return np.clip(target + noise, 0.0, 1.0)


def record_kinds(counts: dict, seed) -> list:
    """Profile kind per record, shuffled so ids do not reveal labels."""
    kinds = [k for k in PROFILE_KINDS for _ in range(counts.get(k, 0))]
    order = np.random.default_rng([seed, 0]).permutation(len(kinds))
    return [kinds[i] for i in order]


def generate_corpus(config: SynthConfig) -> Path:
    """Write ``networks/*.edges`` and ``manifest.csv`` under the output directory.

    Record ``i`` draws from a generator seeded by ``(seed, 1, i)`` so the
    output is a function of the master seed alone.
    """
    out = Path(config.output_dir)
    net_dir = out / "networks"
    try:
        net_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise EnvironmentFault(f"cannot create {net_dir}: {exc}") from exc
    profiles = dict(default_profiles())
    profiles.update(config.profiles)
    kinds = record_kinds(config.counts, config.seed)
    labels = [0 if k == "human" else 1 for k in kinds]
    scores = generate_external_scores(labels, config.score_noise_sd, config.score_flip_prob, [config.seed, 2])
    width = max(4, len(str(len(kinds))))
    records = []
    for i, kind in enumerate(kinds):
        rid = f"acct{i:0{width}d}"
        net = generate_ego_network(profiles[kind], [config.seed, 1, i])
        path = net_dir / f"{rid}.edges"
        try:
            path.write_text(format_edge_list(net), encoding="utf-8")
        except OSError as exc:
            raise EnvironmentFault(f"cannot write {path}: {exc}") from exc
        # round through text so the manifest holds exactly what is parsed back
        score = float(format_number(scores[i]))
        records.append(CorpusRecord(rid, labels[i], score, path))
    manifest = out / "manifest.csv"
    try:
        write_manifest(manifest, records)
    except OSError as exc:
        raise EnvironmentFault(f"cannot write {manifest}: {exc}") from exc
    return manifest


def profile_from_mapping(kind_name: str, values: dict, base: GeneratorProfile | None = None) -> GeneratorProfile:
    """Build a profile from string key/values (config file section)."""
    kwargs = {}
    for key, raw in values.items():
        if key not in PROFILE_FIELDS:
            raise ValueError(f"unknown profile key {key!r} in profile {kind_name}")
        if key == "kind":
            kwargs[key] = str(raw)
        elif key in ("community_count", "template_seed"):
            kwargs[key] = int(raw)
        else:
            kwargs[key] = float(raw)
    if base is not None:
        return replace(base, **kwargs)
    kwargs.setdefault("kind", kind_name)
    return GeneratorProfile(**kwargs)
