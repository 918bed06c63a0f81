"""Matrix product state classifier.

The classifier is a chain of real tensors in mixed-canonical form. Off-center
sites have shape ``(D_left, 2, D_right)``; the orthogonality center carries
the label leg as well, shape ``(D_left, 2, L, D_right)``. Sites left of the
center are left isometries, sites right of it are right isometries, so the
squared norm of the whole mask equals the squared norm of the center tensor.

Samples are kept in batched form as an array ``phi`` of shape ``(T, N, 2)``
holding the single-qubit encodings of every feature.
"""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .tensor import DimensionError, svd_truncate

CHECKPOINT_MAGIC = "mpsgrok-checkpoint"
CHECKPOINT_VERSION = 1


class DegenerateStateError(ArithmeticError):
    """The classifier state collapsed to (numerically) zero norm."""


# --------------------------------------------------------------------------
# encoding
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EncodedSample:
    qubits: np.ndarray  # (N, 2)
    label: int


@dataclass(frozen=True)
class EncodedDataset:
    phi: np.ndarray  # (T, N, 2)
    labels: np.ndarray  # (T,)
    label_dim: int

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n_sites(self) -> int:
        return self.phi.shape[1]

    def one_hot(self) -> np.ndarray:
        y = np.zeros((len(self.labels), self.label_dim))
        y[np.arange(len(self.labels)), self.labels] = 1.0
        return y

    def sample(self, i: int) -> EncodedSample:
        return EncodedSample(self.phi[i], int(self.labels[i]))


def _check_range(raw: np.ndarray) -> None:
    if raw.size and (np.any(~np.isfinite(raw)) or raw.min() < 0.0 or raw.max() > 1.0):
        raise ValueError("raw features must lie in [0, 1]")


def encode_sample(raw, label: int, scale: float = np.pi / 2) -> EncodedSample:
    """Map features in [0, 1] to qubits (cos(scale * x), sin(scale * x))."""
    raw = np.asarray(raw, dtype=float)
    _check_range(raw)
    theta = scale * raw
    return EncodedSample(np.stack([np.cos(theta), np.sin(theta)], axis=-1), int(label))


def encode_dataset(raw, labels, label_dim: int, scale: float = np.pi / 2) -> EncodedDataset:
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 2:
        raise DimensionError("raw features must be a (samples, features) array")
    _check_range(raw)
    labels = np.asarray(labels, dtype=np.int64)
    if len(labels) != len(raw):
        raise DimensionError("feature and label counts differ")
    if labels.size and (labels.min() < 0 or labels.max() >= label_dim):
        raise ValueError(f"labels must lie in [0, {label_dim})")
    theta = scale * raw
    phi = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    return EncodedDataset(phi, labels, label_dim)


def as_batch(data) -> np.ndarray:
    """Return the ``(T, N, 2)`` qubit array of a sample, dataset or raw array."""
    if isinstance(data, EncodedDataset):
        return data.phi
    if isinstance(data, EncodedSample):
        return data.qubits[None]
    phi = np.asarray(data, dtype=float)
    return phi[None] if phi.ndim == 2 else phi


# --------------------------------------------------------------------------
# the classifier
# --------------------------------------------------------------------------

@dataclass
class MpsClassifier:
    sites: list[np.ndarray]
    center: int
    label_dim: int
    chi_max: int

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def bond_dims(self) -> list[int]:
        """Extents of the N - 1 internal bonds."""
        return [s.shape[-1] for s in self.sites[:-1]]

    def copy(self) -> "MpsClassifier":
        return MpsClassifier([s.copy() for s in self.sites], self.center,
                             self.label_dim, self.chi_max)

    def center_tensor(self) -> np.ndarray:
        return self.sites[self.center]

    def norm(self) -> float:
        return float(np.linalg.norm(self.center_tensor()))

    def scaled(self, c: float) -> "MpsClassifier":
        out = self.copy()
        out.sites[out.center] = out.sites[out.center] * c
        return out

    def normalize(self) -> "MpsClassifier":
        nrm = self.norm()
        if not np.isfinite(nrm) or nrm < 1e-300:
            raise DegenerateStateError("cannot normalize a zero-norm classifier")
        self.sites[self.center] = self.sites[self.center] / nrm
        return self

    def move_center(self, target: int) -> "MpsClassifier":
        """Shift the orthogonality center (and the label leg) by exact QR steps."""
        if not 0 <= target < self.n_sites:
            raise IndexError(f"site {target} outside chain of {self.n_sites}")
        while self.center < target:
            c = self.center
            t = self.sites[c]
            dl, d, nl, dr = t.shape
            m = t.transpose(0, 1, 3, 2).reshape(dl * d, dr * nl)
            q, r = np.linalg.qr(m)
            k = q.shape[1]
            self.sites[c] = q.reshape(dl, d, k)
            r = r.reshape(k, dr, nl)
            self.sites[c + 1] = np.einsum("kml,msb->kslb", r, self.sites[c + 1])
            self.center += 1
        while self.center > target:
            c = self.center
            t = self.sites[c]
            dl, d, nl, dr = t.shape
            m = t.transpose(0, 2, 1, 3).reshape(dl * nl, d * dr)
            q, r = np.linalg.qr(m.T)
            k = q.shape[1]
            self.sites[c] = q.T.reshape(k, d, dr)
            r = r.T.reshape(dl, nl, k)
            self.sites[c - 1] = np.einsum("asm,mlk->aslk", self.sites[c - 1], r)
            self.center -= 1
        return self


def init_mps(n_sites: int, chi_max: int, label_dim: int, seed: int) -> MpsClassifier:
    """Random classifier in mixed-canonical form, center at site 0, unit norm.

    Entries are i.i.d. uniform(-1, 1). Internal bond ``i`` (between sites
    ``i - 1`` and ``i``) has extent ``min(chi_max, 2**i, 2**(N - i))``.
    """
    if n_sites < 2:
        raise ValueError("need at least two sites")
    if chi_max < 1:
        raise ValueError("chi_max must be >= 1")
    if label_dim < 2:
        raise ValueError("label_dim must be >= 2")
    rng = np.random.default_rng(seed)
    draw = lambda shape: rng.uniform(-1.0, 1.0, size=shape)  # noqa: E731
    dims = [1] + [min(chi_max, 2 ** min(i, n_sites - i)) for i in range(1, n_sites)] + [1]
    sites = [draw((dims[0], 2, label_dim, dims[1]))]
    for i in range(1, n_sites):
        sites.append(draw((dims[i], 2, dims[i + 1])))

    # right-canonicalize sites N-1 .. 1, pushing the remainder into the center
    for i in range(n_sites - 1, 0, -1):
        t = sites[i]
        dl, d, dr = t.shape
        q, r = np.linalg.qr(t.reshape(dl, d * dr).T)
        k = q.shape[1]
        sites[i] = q.T.reshape(k, d, dr)
        if i - 1 == 0:
            sites[0] = np.einsum("aslm,mk->aslk", sites[0], r.T)
        else:
            sites[i - 1] = np.einsum("asm,mk->ask", sites[i - 1], r.T)
    mps = MpsClassifier(sites, 0, label_dim, chi_max)
    return mps.normalize()


# --------------------------------------------------------------------------
# environments and prediction
# --------------------------------------------------------------------------

def _site_matrix(t: np.ndarray) -> np.ndarray:
    """View any site as (D_left, 2, extra, D_right); extra is 1 off-center."""
    return t[:, :, None, :] if t.ndim == 3 else t


def grow_left(env: np.ndarray, site: np.ndarray, phi_j: np.ndarray) -> np.ndarray:
    """Absorb an off-center site into a batch of left environments ``(T, D)``."""
    dl, d, dr = site.shape
    tmp = (env @ site.reshape(dl, d * dr)).reshape(-1, d, dr)
    return np.einsum("tsb,ts->tb", tmp, phi_j)


def grow_right(env: np.ndarray, site: np.ndarray, phi_j: np.ndarray) -> np.ndarray:
    """Absorb an off-center site into a batch of right environments ``(T, D)``."""
    dl, d, dr = site.shape
    tmp = (env @ site.reshape(dl * d, dr).T).reshape(-1, dl, d)
    return np.einsum("tas,ts->ta", tmp, phi_j)


def left_environments(mps: MpsClassifier, phi: np.ndarray, upto: int) -> list[np.ndarray]:
    """``[L_0, ..., L_upto]``; ``L_j`` contracts sites ``0..j-1`` with the samples."""
    env = np.ones((phi.shape[0], 1))
    out = [env]
    for j in range(upto):
        env = grow_left(env, mps.sites[j], phi[:, j])
        out.append(env)
    return out


def right_environments(mps: MpsClassifier, phi: np.ndarray, downto: int) -> dict[int, np.ndarray]:
    """``{j: R_j}`` for ``j = N..downto``; ``R_j`` contracts sites ``j..N-1``."""
    n = mps.n_sites
    env = np.ones((phi.shape[0], 1))
    out = {n: env}
    for j in range(n - 1, downto - 1, -1):
        env = grow_right(env, mps.sites[j], phi[:, j])
        out[j] = env
    return out


def predict_batch(mps: MpsClassifier, data) -> np.ndarray:
    """Scores ``f^l(x)`` for a batch, shape ``(T, L)``."""
    phi = as_batch(data)
    if phi.shape[1] != mps.n_sites:
        raise DimensionError(
            f"samples have {phi.shape[1]} features, classifier has {mps.n_sites} sites"
        )
    c = mps.center
    left = np.ones((phi.shape[0], 1))
    for j in range(c):
        left = grow_left(left, mps.sites[j], phi[:, j])
    right = np.ones((phi.shape[0], 1))
    for j in range(mps.n_sites - 1, c, -1):
        right = grow_right(right, mps.sites[j], phi[:, j])
    return np.einsum("ta,aslb,ts,tb->tl", left, mps.sites[c], phi[:, c], right)


def predict_scores(mps: MpsClassifier, sample) -> np.ndarray:
    """Scores of a single encoded sample, shape ``(L,)``."""
    phi = as_batch(sample)
    if phi.shape[0] != 1:
        raise DimensionError("predict_scores takes a single sample; use predict_batch")
    return predict_batch(mps, phi)[0]


def classify(scores) -> int:
    """Index of the largest |score|; ties go to the lowest index."""
    s = np.asarray(scores, dtype=float)
    if s.ndim != 1 or s.size == 0:
        raise DimensionError("classify needs a non-empty score vector")
    return int(np.argmax(np.abs(s)))


def classify_batch(scores: np.ndarray) -> np.ndarray:
    return np.argmax(np.abs(scores), axis=1)


def cost(mps: MpsClassifier, dataset: EncodedDataset) -> float:
    """Half the summed squared residual between scores and one-hot labels."""
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    f = predict_batch(mps, dataset)
    return 0.5 * float(np.sum((f - dataset.one_hot()) ** 2))


def accuracy(scores: np.ndarray, labels: np.ndarray, label_dim: int):
    """Overall accuracy and per-class accuracies (NaN for absent classes)."""
    pred = classify_batch(scores)
    hit = pred == labels
    overall = float(np.mean(hit)) if len(labels) else float("nan")
    per = []
    for lab in range(label_dim):
        mask = labels == lab
        per.append(float(np.mean(hit[mask])) if mask.any() else float("nan"))
    return overall, per


# --------------------------------------------------------------------------
# two-site optimization
# --------------------------------------------------------------------------

@dataclass
class BondRecord:
    bond: int
    direction: str
    singular_values: np.ndarray
    discarded_weight: float
    label_singular_values: list[np.ndarray]
    label_tensors: np.ndarray | None = None  # B' as (Dl, 2, 2, Dr, L)
    step_scores: np.ndarray | None = None  # training scores (T, L) seen by this update


def merge_bond(mps: MpsClassifier, bond: int) -> tuple[np.ndarray, str]:
    """Merge sites ``bond`` and ``bond + 1`` into B with axes (Dl, s1, s2, Dr, L)."""
    a, b = mps.sites[bond], mps.sites[bond + 1]
    if mps.center == bond:
        return np.einsum("aslm,mtb->astbl", a, b), "right"
    if mps.center == bond + 1:
        return np.einsum("asm,mtlb->astbl", a, b), "left"
    raise ValueError(
        f"center at site {mps.center} is not adjacent to bond {bond} / {bond + 1}"
    )


def projected_inputs(left: np.ndarray, phi_a: np.ndarray, phi_b: np.ndarray,
                     right: np.ndarray) -> np.ndarray:
    """Reduced inputs ``Phi~`` flattened to ``(T, Dl*2*2*Dr)``."""
    t = left.shape[0]
    x = np.einsum("ta,ts,tu,tb->tasub", left, phi_a, phi_b, right, optimize=True)
    return x.reshape(t, -1)


def bond_gradient(B: np.ndarray, proj: np.ndarray, targets: np.ndarray):
    """Scores and the descent direction ``-dC/dB`` for a merged bond tensor."""
    nl = B.shape[-1]
    flat = B.reshape(-1, nl)
    f = proj @ flat
    delta = proj.T @ (targets - f)
    return f, delta.reshape(B.shape)


def split_bond(mps: MpsClassifier, bond: int, B: np.ndarray, direction: str,
               chi_max: int, rel_threshold: float) -> BondRecord:
    """Factor an updated merged tensor back into two sites and renormalize.

    ``direction`` is where the center goes: ``"right"`` leaves a left isometry
    on ``bond`` and the center on ``bond + 1``; ``"left"`` the mirror image.
    """
    dl, d1, d2, dr, nl = B.shape
    if not np.any(B):
        raise DegenerateStateError(f"merged tensor at bond {bond} vanished")
    label_sv = [
        np.linalg.svd(B[..., lab].reshape(dl * d1, d2 * dr), compute_uv=False)
        for lab in range(nl)
    ]
    if direction == "right":
        m = B.reshape(dl * d1, d2 * dr * nl)
        res = svd_truncate(m, chi_max, rel_threshold)
        k = res.rank
        left_site = res.u.reshape(dl, d1, k)
        center = (res.singular_values[:, None] * res.vt).reshape(k, d2, dr, nl)
        center = center.transpose(0, 1, 3, 2)
        nrm = np.linalg.norm(center)
        mps.sites[bond] = left_site
        mps.sites[bond + 1] = center / nrm
        mps.center = bond + 1
    elif direction == "left":
        m = B.transpose(0, 1, 4, 2, 3).reshape(dl * d1 * nl, d2 * dr)
        res = svd_truncate(m, chi_max, rel_threshold)
        k = res.rank
        right_site = res.vt.reshape(k, d2, dr)
        center = (res.u * res.singular_values[None, :]).reshape(dl, d1, nl, k)
        nrm = np.linalg.norm(center)
        mps.sites[bond + 1] = right_site
        mps.sites[bond] = center / nrm
        mps.center = bond
    else:
        raise ValueError(f"unknown direction {direction!r}")
    if not np.isfinite(nrm) or nrm < 1e-300:
        raise DegenerateStateError(f"truncated state at bond {bond} vanished")
    return BondRecord(bond, direction, res.singular_values, res.discarded_weight, label_sv, B)


def _direction_for(mps: MpsClassifier, bond: int, direction: str | None) -> str:
    if not 0 <= bond < mps.n_sites - 1:
        raise IndexError(f"bond {bond} outside chain")
    if direction is None:
        direction = "right" if mps.center == bond else "left"
    return direction


def two_site_update(mps: MpsClassifier, bond: int, dataset: EncodedDataset,
                    learning_rate: float, direction: str | None = None,
                    chi_max: int | None = None, rel_threshold: float = 1e-12):
    """One gradient step on the merged tensor of sites ``bond``, ``bond + 1``.

    Environments are built from scratch; :func:`sweep_pass` reuses them
    between neighbouring bonds instead. Returns ``(new_mps, BondRecord)``.
    The center leaves on the side given by ``direction``; by default it moves
    across the bond (rightward if it starts on ``bond``).
    """
    direction = _direction_for(mps, bond, direction)
    phi = as_batch(dataset)
    new = mps.copy()
    B, _ = merge_bond(new, bond)
    left = left_environments(new, phi, bond)[bond]
    right = right_environments(new, phi, bond + 2)[bond + 2]
    proj = projected_inputs(left, phi[:, bond], phi[:, bond + 1], right)
    _, delta = bond_gradient(B, proj, dataset.one_hot())
    B_new = B + learning_rate * delta
    rec = split_bond(new, bond, B_new, direction, chi_max or new.chi_max, rel_threshold)
    return new, rec


class SweepEngine:
    """Cached left/right environments for repeated passes over a training set.

    The right environments produced by a leftward pass are exactly the ones
    the following rightward pass needs, so they are carried across sweeps.
    """

    def __init__(self, dataset: EncodedDataset):
        self.dataset = dataset
        self.phi = dataset.phi
        self.targets = dataset.one_hot()
        self._right: dict[int, np.ndarray] | None = None
        self._left: list[np.ndarray] | None = None
        self._owner: list[int] = []

    def invalidate(self) -> None:
        self._right = None
        self._left = None

    def _owns(self, mps: MpsClassifier) -> bool:
        return self._owner == [id(s) for s in mps.sites]

    def _claim(self, mps: MpsClassifier) -> None:
        self._owner = [id(s) for s in mps.sites]

    def _update(self, mps, bond, left, right, alpha, direction, chi_max, rel_threshold):
        B, _ = merge_bond(mps, bond)
        proj = projected_inputs(left, self.phi[:, bond], self.phi[:, bond + 1], right)
        f, delta = bond_gradient(B, proj, self.targets)
        rec = split_bond(mps, bond, B + alpha * delta, direction, chi_max, rel_threshold)
        rec.step_scores = f
        return rec

    def right_pass(self, mps: MpsClassifier, alpha: float, chi_max: int,
                   rel_threshold: float) -> list[BondRecord]:
        """Update bonds 0..N-2 in place, moving the center from 0 to N-1."""
        if mps.center != 0 or not self._owns(mps):
            mps.move_center(0)
            self.invalidate()
        n = mps.n_sites
        if self._right is None:
            self._right = right_environments(mps, self.phi, 2)
        left = np.ones((self.phi.shape[0], 1))
        lefts = [left]
        records = []
        for bond in range(n - 1):
            rec = self._update(mps, bond, left, self._right[bond + 2], alpha, "right",
                               chi_max, rel_threshold)
            records.append(rec)
            left = grow_left(left, mps.sites[bond], self.phi[:, bond])
            lefts.append(left)
        self._left = lefts
        self._right = None
        self._claim(mps)
        return records

    def left_pass(self, mps: MpsClassifier, alpha: float, chi_max: int,
                  rel_threshold: float) -> list[BondRecord]:
        """Update bonds N-2..0 in place, moving the center from N-1 to 0."""
        n = mps.n_sites
        if mps.center != n - 1 or self._left is None or not self._owns(mps):
            mps.move_center(n - 1)
            self._left = left_environments(mps, self.phi, n - 1)
        right = np.ones((self.phi.shape[0], 1))
        rights = {n: right}
        records = []
        for bond in range(n - 2, -1, -1):
            rec = self._update(mps, bond, self._left[bond], right, alpha, "left",
                               chi_max, rel_threshold)
            records.append(rec)
            right = grow_right(right, mps.sites[bond + 1], self.phi[:, bond + 1])
            rights[bond + 1] = right
        self._right = rights
        self._left = None
        self._claim(mps)
        return records


def sweep_pass(mps: MpsClassifier, dataset: EncodedDataset, learning_rate: float,
               chi_max: int | None = None, rel_threshold: float = 1e-12,
               engine: SweepEngine | None = None):
    """Full right-then-left pass; returns ``(new_mps, right_records, left_records)``."""
    engine = engine or SweepEngine(dataset)
    # shallow copy: updates replace site arrays, never mutate them
    new = MpsClassifier(list(mps.sites), mps.center, mps.label_dim, mps.chi_max)
    chi = chi_max or new.chi_max
    right = engine.right_pass(new, learning_rate, chi, rel_threshold)
    left = engine.left_pass(new, learning_rate, chi, rel_threshold)
    return new, right, left


# --------------------------------------------------------------------------
# checkpoints
# --------------------------------------------------------------------------

def dumps_checkpoint(mps: MpsClassifier) -> str:
    out = io.StringIO()
    out.write(f"{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}\n")
    out.write(f"n_sites {mps.n_sites}\nlabel_dim {mps.label_dim}\n")
    out.write(f"chi_max {mps.chi_max}\ncenter {mps.center}\n")
    for i, t in enumerate(mps.sites):
        out.write(f"site {i} " + " ".join(str(x) for x in t.shape) + "\n")
        out.write(" ".join("%.17g" % v for v in t.ravel()) + "\n")
    return out.getvalue()


def loads_checkpoint(text: str) -> MpsClassifier:
    lines = text.splitlines()
    head = lines[0].split()
    if len(head) != 2 or head[0] != CHECKPOINT_MAGIC:
        raise ValueError("not an mpsgrok checkpoint")
    if int(head[1]) != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {head[1]}")
    meta = {}
    for line in lines[1:5]:
        key, val = line.split()
        meta[key] = int(val)
    sites = []
    body = lines[5:]
    for i in range(meta["n_sites"]):
        tag = body[2 * i].split()
        if tag[0] != "site" or int(tag[1]) != i:
            raise ValueError(f"malformed site header {body[2 * i]!r}")
        shape = tuple(int(x) for x in tag[2:])
        vals = np.array([float(v) for v in body[2 * i + 1].split()], dtype=float)
        sites.append(vals.reshape(shape))
    return MpsClassifier(sites, meta["center"], meta["label_dim"], meta["chi_max"])


def save_checkpoint(mps: MpsClassifier, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_checkpoint(mps))


def load_checkpoint(path) -> MpsClassifier:
    with open(path) as fh:
        return loads_checkpoint(fh.read())


def dense_mask(mps: MpsClassifier) -> np.ndarray:
    """Full ``(2,)*N + (L,)`` tensor of the classifier. Only for small chains."""
    out = None
    for t in mps.sites:
        t4 = _site_matrix(t)
        if out is None:
            out = t4  # (1, 2, l, Dr)
            continue
        # out: (1, P, l, D) ; t4: (D, 2, l', D')
        out = np.einsum("apld,dsmb->apslmb", out, t4)
        a, p, s, l, m, b = out.shape
        out = out.reshape(a, p * s, l * m, b)
    return out.reshape((2,) * mps.n_sites + (mps.label_dim,))
