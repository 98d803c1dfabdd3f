"""Grayscale images, their grid-graph representation, and synthetic datasets.

An image is a rectangle of non-negative magnitudes. Its graph has one vertex
per pixel at or above the vertex threshold, 4-neighbor edges between surviving
pixels, and the grayscale value as the layer-0 feature. Pruned pixels stay in
the grid as dead cells so pooling and flattening keep their positions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, FormatError, ValidationError

__all__ = [
    "Image",
    "GridGraph",
    "Dataset",
    "parse_image_csv",
    "parse_image_raster",
    "load_image",
    "save_image_csv",
    "save_image_raster",
    "build_graph",
    "synth_dataset",
    "write_dataset",
    "read_manifest",
    "load_manifest_dataset",
    "TEMPLATE_NAMES",
]


@dataclass
class Image:
    """A width x height grid of non-negative grayscale magnitudes."""

    width: int
    height: int
    pixels: np.ndarray  # float32 [height, width]

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float32)
        if self.pixels.shape != (self.height, self.width):
            raise ValidationError(
                f"pixel block is {self.pixels.shape}, expected "
                f"({self.height}, {self.width})"
            )
        if self.pixels.size and float(self.pixels.min()) < 0.0:
            raise ValidationError("pixel magnitudes must be non-negative")


@dataclass
class Dataset:
    """Labeled images plus the class count and a train/test designation."""

    samples: list[tuple[Image, int]]
    num_classes: int
    split: str = "train"

    def __post_init__(self):
        for _, label in self.samples:
            if not 0 <= label < self.num_classes:
                raise ValidationError(f"label {label} outside [0, {self.num_classes})")


class GridGraph:
    """Vertices on a 2-D grid with 4-neighbor edges among surviving cells.

    ``cells`` lists the flat (row-major) grid position of each vertex; any
    vertex storage order is legal as long as ``edges`` uses the same ids.
    ``features`` holds one row per vertex (layer 0: a single grayscale
    column) and may be None for purely structural graphs.
    """

    def __init__(
        self,
        width: int,
        height: int,
        alive: np.ndarray,
        cells: np.ndarray,
        edges: np.ndarray,
        features: np.ndarray | None = None,
    ):
        self.width = int(width)
        self.height = int(height)
        self.alive = np.asarray(alive, dtype=bool).reshape(height, width)
        self.cells = np.asarray(cells, dtype=np.int64)
        self.edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        self.features = None
        if features is not None:
            self.features = np.asarray(features, dtype=np.float32).reshape(
                len(self.cells), -1
            )

    @property
    def n_vertices(self) -> int:
        return len(self.cells)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_vertices, dtype=np.int64)
        if self.n_edges:
            deg += np.bincount(self.edges[:, 0], minlength=self.n_vertices)
            deg += np.bincount(self.edges[:, 1], minlength=self.n_vertices)
        return deg

    @cached_property
    def cell_to_vertex(self) -> np.ndarray:
        """Flat cell index -> vertex id, -1 for dead cells."""
        lookup = np.full(self.width * self.height, -1, dtype=np.int64)
        lookup[self.cells] = np.arange(self.n_vertices)
        return lookup

    def directed_edges_with_self(self) -> tuple[np.ndarray, np.ndarray]:
        """Both directions of every edge plus one self-loop per vertex."""
        n = self.n_vertices
        if self.n_edges:
            a, b = self.edges[:, 0], self.edges[:, 1]
            src = np.concatenate([a, b, np.arange(n)])
            dst = np.concatenate([b, a, np.arange(n)])
        else:
            src = np.arange(n)
            dst = np.arange(n)
        return src.astype(np.int64), dst.astype(np.int64)

    def mean_operator(self, dtype=np.float32) -> sp.csr_matrix:
        """Row-normalized aggregation matrix: row i averages N(i) and i."""
        n = self.n_vertices
        src, dst = self.directed_edges_with_self()
        scale = 1.0 / (self.degrees + 1.0)
        data = scale[dst].astype(dtype)
        return sp.csr_matrix((data, (dst, src)), shape=(n, n))


def parse_image_csv(text: str, width: int | None = None, height: int | None = None) -> Image:
    """Parse the plain-text format: one image row per line, comma-separated reals."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            rows.append([float(tok) for tok in line.split(",")])
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from exc
    if not rows:
        raise FormatError("empty image file")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise FormatError(f"ragged rows: widths {sorted(widths)}")
    w, h = widths.pop(), len(rows)
    if width is not None and width != w:
        raise FormatError(f"declared width {width}, file has {w}")
    if height is not None and height != h:
        raise FormatError(f"declared height {height}, file has {h}")
    return Image(width=w, height=h, pixels=np.array(rows, dtype=np.float32))


def parse_image_raster(
    data: bytes, width: int, height: int, bits: int, scale: float
) -> Image:
    """Parse a row-major little-endian unsigned raster scaled to magnitudes."""
    if bits not in (8, 16):
        raise FormatError(f"unsupported bit depth {bits}")
    if scale <= 0:
        raise FormatError(f"scale must be positive, got {scale}")
    sample = bits // 8
    expected = width * height * sample
    if len(data) != expected:
        raise FormatError(
            f"raster has {len(data)} bytes, expected {expected} "
            f"for {width}x{height}x{bits}-bit"
        )
    dtype = np.uint8 if bits == 8 else np.dtype("<u2")
    raw = np.frombuffer(data, dtype=dtype).astype(np.float32)
    return Image(width=width, height=height, pixels=(raw * scale).reshape(height, width))


def _read_raster_header(path: Path) -> dict:
    fields = {}
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or "=" not in line:
            continue
        key, value = line.split("=", 1)
        fields[key.strip()] = value.strip()
    try:
        return {
            "width": int(fields["width"]),
            "height": int(fields["height"]),
            "bits": int(fields["bits"]),
            "scale": float(fields["scale"]),
        }
    except KeyError as exc:
        raise FormatError(f"raster header {path} missing field {exc}") from exc


def load_image(path: str | Path) -> Image:
    """Load a .csv image or a .raw/.bin raster with its sidecar header.

    The raster ``foo.raw`` reads dimensions, bit depth, and magnitude scale
    from ``foo.hdr`` (key=value lines).
    """
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return parse_image_csv(path.read_text())
    if path.suffix.lower() in (".raw", ".bin"):
        hdr = _read_raster_header(path.with_suffix(".hdr"))
        return parse_image_raster(path.read_bytes(), **hdr)
    raise FormatError(f"unrecognized image extension: {path.name}")


def save_image_csv(image: Image, path: str | Path) -> None:
    lines = [
        ",".join(repr(float(v)) for v in row) for row in image.pixels
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def save_image_raster(image: Image, path: str | Path, bits: int = 16, scale: float | None = None) -> None:
    """Write a raster plus sidecar header; scale defaults to cover the max pixel."""
    path = Path(path)
    top = float(image.pixels.max()) if image.pixels.size else 1.0
    full = (1 << bits) - 1
    if scale is None:
        scale = (top / full) if top > 0 else 1.0 / full
    quantized = np.clip(np.round(image.pixels / scale), 0, full)
    dtype = np.uint8 if bits == 8 else np.dtype("<u2")
    path.write_bytes(quantized.astype(dtype).tobytes())
    path.with_suffix(".hdr").write_text(
        f"width={image.width}\nheight={image.height}\nbits={bits}\nscale={scale!r}\n"
    )


def build_graph(image: Image, i_vertex: float = 0.0) -> GridGraph:
    """Threshold the image into a grid graph.

    Cells with magnitude >= ``i_vertex`` become vertices (0 disables pruning
    since magnitudes are non-negative); edges join grid-adjacent survivors.
    Vertices are stored in row-major cell order.
    """
    if i_vertex < 0:
        raise ConfigError(f"i_vertex must be >= 0, got {i_vertex}")
    h, w = image.height, image.width
    alive = image.pixels >= np.float32(i_vertex)
    cells = np.flatnonzero(alive.ravel())
    lookup = np.full(h * w, -1, dtype=np.int64)
    lookup[cells] = np.arange(len(cells))

    pairs = []
    right = alive[:, :-1] & alive[:, 1:]
    if right.any():
        r, c = np.nonzero(right)
        pairs.append(np.stack([lookup[r * w + c], lookup[r * w + c + 1]], axis=1))
    down = alive[:-1, :] & alive[1:, :]
    if down.any():
        r, c = np.nonzero(down)
        pairs.append(np.stack([lookup[r * w + c], lookup[(r + 1) * w + c]], axis=1))
    edges = np.concatenate(pairs, axis=0) if pairs else np.empty((0, 2), dtype=np.int64)

    feats = image.pixels.ravel()[cells].reshape(-1, 1)
    return GridGraph(width=w, height=h, alive=alive, cells=cells, edges=edges, features=feats)


# ---------------------------------------------------------------------------
# Synthetic dataset generator
# ---------------------------------------------------------------------------
#
# Each class is one bright template scaled to a class-specific pixel budget.
# Budgets are spread symmetrically around the requested foreground fraction
# (mean multiplier 1.0), which keeps the aggregate foreground share on target
# and gives classes well-separated vertex counts.


def _rect(rows: int, cols: int) -> np.ndarray:
    return np.ones((max(1, rows), max(1, cols)), dtype=bool)


def _tpl_blob(k: int) -> np.ndarray:
    a = max(1, math.isqrt(k))
    return _rect(a, round(k / a))


def _tpl_bar(k: int) -> np.ndarray:
    h = max(1, round(math.sqrt(k / 3)))
    return _rect(h, round(k / h))


def _tpl_cross(k: int) -> np.ndarray:
    t = max(1, round(math.sqrt(k / 5)))
    a = max(2 * t, round((k + t * t) / (2 * t)))
    m = np.zeros((a, a), dtype=bool)
    lo = (a - t) // 2
    m[lo : lo + t, :] = True
    m[:, lo : lo + t] = True
    return m


def _tpl_tee(k: int) -> np.ndarray:
    t = max(1, round(math.sqrt(k / 5)))
    w = max(2 * t, round(0.6 * k / t))
    h = max(1, round((k - w * t) / t))
    m = np.zeros((t + h, w), dtype=bool)
    m[:t, :] = True
    lo = (w - t) // 2
    m[t:, lo : lo + t] = True
    return m


def _tpl_ell(k: int) -> np.ndarray:
    t = max(1, round(math.sqrt(k / 5)))
    v = max(2 * t, round(0.6 * k / t))
    w = max(t + 1, round((k - v * t) / t) + t)
    m = np.zeros((v, w), dtype=bool)
    m[:, :t] = True
    m[v - t :, t:] = True
    return m


def _tpl_aitch(k: int) -> np.ndarray:
    t = max(1, round(math.sqrt(k / 7)))
    h = max(2 * t + 1, round(k / (3 * t)))
    mid = max(1, round((k - 2 * h * t) / t))
    w = 2 * t + mid
    m = np.zeros((h, w), dtype=bool)
    m[:, :t] = True
    m[:, w - t :] = True
    lo = (h - t) // 2
    m[lo : lo + t, t : w - t] = True
    return m


def _tpl_diamond(k: int) -> np.ndarray:
    r = max(1, round((math.sqrt(max(1, 2 * k - 1)) - 1) / 2))
    span = np.arange(2 * r + 1)
    return (np.abs(span[:, None] - r) + np.abs(span[None, :] - r)) <= r


def _tpl_ring(k: int) -> np.ndarray:
    t = max(1, round(math.sqrt(k) / 4))
    s = max(2 * t + 1, round(k / (4 * t) + t))
    m = np.ones((s, s), dtype=bool)
    m[t : s - t, t : s - t] = False
    return m


_TEMPLATES = [
    ("blob", _tpl_blob),
    ("bar", _tpl_bar),
    ("cross", _tpl_cross),
    ("tee", _tpl_tee),
    ("ell", _tpl_ell),
    ("aitch", _tpl_aitch),
    ("diamond", _tpl_diamond),
    ("ring", _tpl_ring),
]

TEMPLATE_NAMES = [name for name, _ in _TEMPLATES]


def _class_multiplier(class_idx: int, num_classes: int) -> float:
    if num_classes == 1:
        return 1.0
    return 0.7 + 0.6 * class_idx / (num_classes - 1)


def synth_dataset(
    num_classes: int,
    samples_per_class: int,
    image_size: int | tuple[int, int],
    foreground_fraction: float,
    noise_level: float,
    seed: int,
    split: str = "train",
) -> Dataset:
    """Generate labeled images: one bright template per class on a dim background.

    Background pixels are uniform in [0, noise_level); foreground pixels are
    uniform in [0.6, 1.4). Templates are placed at a random offset and one of
    four 90-degree rotations. Identical arguments reproduce identical pixels.
    """
    if not 0 < foreground_fraction < 1:
        raise ConfigError(f"foreground_fraction must be in (0,1), got {foreground_fraction}")
    if noise_level < 0:
        raise ConfigError(f"noise_level must be >= 0, got {noise_level}")
    if num_classes < 1 or num_classes > len(_TEMPLATES):
        raise ConfigError(
            f"num_classes must be in [1, {len(_TEMPLATES)}], got {num_classes}"
        )
    if isinstance(image_size, int):
        w, h = image_size, image_size
    else:
        w, h = image_size

    samples = []
    for cls in range(num_classes):
        budget = round(_class_multiplier(cls, num_classes) * foreground_fraction * w * h)
        mask0 = _TEMPLATES[cls][1](max(1, budget))
        for i in range(samples_per_class):
            rng = np.random.default_rng([seed, cls, i])
            mask = np.rot90(mask0, k=int(rng.integers(4)))
            mh, mw = mask.shape
            if mh > h or mw > w:
                raise ConfigError(
                    f"class {cls} template {mh}x{mw} does not fit a {h}x{w} image"
                )
            top = int(rng.integers(h - mh + 1))
            left = int(rng.integers(w - mw + 1))
            pixels = rng.uniform(0.0, noise_level, size=(h, w)).astype(np.float32)
            fg = rng.uniform(0.6, 1.4, size=int(mask.sum())).astype(np.float32)
            block = pixels[top : top + mh, left : left + mw]
            block[mask] = fg
            samples.append((Image(width=w, height=h, pixels=pixels), cls))
    return Dataset(samples=samples, num_classes=num_classes, split=split)


# ---------------------------------------------------------------------------
# On-disk dataset layout: one CSV image per sample plus a manifest
# ---------------------------------------------------------------------------

MANIFEST_HEADER = "path,label"


def write_dataset(dataset: Dataset, out_dir: str | Path, manifest_name: str = "manifest.csv") -> Path:
    """Write images as CSV files and a `path,label` manifest; returns manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [MANIFEST_HEADER]
    digits = max(5, len(str(len(dataset.samples))))
    for idx, (image, label) in enumerate(dataset.samples):
        name = f"img_{idx:0{digits}d}.csv"
        save_image_csv(image, out_dir / name)
        lines.append(f"{name},{label}")
    manifest = out_dir / manifest_name
    manifest.write_text("\n".join(lines) + "\n")
    return manifest


def read_manifest(path: str | Path) -> list[tuple[Path, int]]:
    """Read `path,label` lines; relative paths resolve against the manifest dir."""
    path = Path(path)
    base = path.parent
    entries = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line == MANIFEST_HEADER:
            continue
        try:
            rel, label = line.rsplit(",", 1)
            entries.append((base / rel, int(label)))
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: bad manifest line {line!r}") from exc
    return entries


def load_manifest_dataset(path: str | Path, split: str = "test") -> Dataset:
    entries = read_manifest(path)
    if not entries:
        raise FormatError(f"manifest {path} lists no images")
    samples = [(load_image(p), label) for p, label in entries]
    num_classes = max(label for _, label in entries) + 1
    return Dataset(samples=samples, num_classes=num_classes, split=split)
