"""Architecture descriptions as strings over a layer-kind alphabet.

An alphabet maps layer-type names (``"Conv2D"``, ``"MaxPool"``, ...) to
single-character codes.  An architecture is then just an ordered string of
codes, one per layer, which is what the alignment and pattern code consume.
Only the layer *kind* is encoded; filter counts, kernel sizes etc. are not.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Union

Source = Union[str, bytes, Mapping]


class SpecError(ValueError):
    """Raised for malformed alphabet or architecture documents."""


class UnknownLayerError(SpecError):
    def __init__(self, layer: str, position: int, spec_name: str = ""):
        self.layer = layer
        self.position = position
        where = f" in {spec_name!r}" if spec_name else ""
        super().__init__(f"unknown layer {layer!r} at position {position}{where}")


@dataclass(frozen=True)
class LayerKind:
    code: str
    name: str


class LayerAlphabet:
    """Bijective name <-> code lookup, in declaration order."""

    def __init__(self, entries: Iterable[LayerKind]):
        entries = tuple(entries)
        if not entries:
            raise SpecError("alphabet is empty")
        by_name: dict[str, LayerKind] = {}
        by_code: dict[str, LayerKind] = {}
        for kind in entries:
            if not kind.name:
                raise SpecError("layer name must be non-empty")
            if len(kind.code) != 1:
                raise SpecError(f"code for {kind.name!r} must be a single character, got {kind.code!r}")
            if kind.name in by_name:
                raise SpecError(f"duplicate layer name {kind.name!r}")
            if kind.code in by_code:
                raise SpecError(
                    f"duplicate code {kind.code!r} for {kind.name!r} "
                    f"(already used by {by_code[kind.code].name!r})")
            by_name[kind.name] = kind
            by_code[kind.code] = kind
        self.entries = entries
        self._by_name = by_name
        self._by_code = by_code

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __eq__(self, other) -> bool:
        return isinstance(other, LayerAlphabet) and self.entries == other.entries

    def __repr__(self) -> str:
        return f"LayerAlphabet({len(self)} kinds)"

    def code(self, name: str) -> str:
        return self._by_name[name].code

    def name(self, code: str) -> str:
        return self._by_code[code].name

    def has_code(self, code: str) -> bool:
        return code in self._by_code


@dataclass(frozen=True)
class ArchSpec:
    """A named architecture; ``layers`` is the code string, one char per layer."""

    name: str
    layers: str

    def __post_init__(self):
        if not self.layers:
            raise SpecError(f"spec {self.name!r} has no layers")

    def __len__(self) -> int:
        return len(self.layers)


def _load(source: Source, what: str):
    if isinstance(source, Mapping):
        return source
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SpecError(f"{what} is not valid UTF-8: {exc}") from None
    source = source.lstrip("\ufeff")
    try:
        return json.loads(source)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{what} is not valid JSON: {exc}") from None


def parse_alphabet(source: Source) -> LayerAlphabet:
    """Parse a ``{"LayerName": "c", ...}`` document."""
    doc = _load(source, "alphabet")
    if not isinstance(doc, Mapping):
        raise SpecError("alphabet must be a JSON object mapping layer name to code")
    kinds = []
    for name, code in doc.items():
        if not isinstance(code, str):
            raise SpecError(f"code for {name!r} must be a string")
        kinds.append(LayerKind(code=code, name=name))
    return LayerAlphabet(kinds)


def parse_spec(source: Source, alphabet: LayerAlphabet) -> ArchSpec:
    """Parse a ``{"name": ..., "layers": [...]}`` document against ``alphabet``."""
    doc = _load(source, "architecture spec")
    if not isinstance(doc, Mapping):
        raise SpecError("architecture spec must be a JSON object")
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        raise SpecError("spec field 'name' must be a non-empty string")
    layers = doc.get("layers")
    if not isinstance(layers, list):
        raise SpecError(f"spec {name!r}: field 'layers' must be an array")
    if not layers:
        raise SpecError(f"spec {name!r} has an empty layer list")
    codes = []
    for pos, layer in enumerate(layers):
        if not isinstance(layer, str) or layer not in alphabet:
            raise UnknownLayerError(str(layer), pos, name)
        codes.append(alphabet.code(layer))
    return ArchSpec(name=name, layers="".join(codes))


def encode(spec: ArchSpec) -> str:
    return spec.layers


def decode(symbols: str, alphabet: LayerAlphabet, name: str) -> ArchSpec:
    """Inverse of :func:`encode`; validates every symbol against ``alphabet``."""
    for pos, code in enumerate(symbols):
        if not alphabet.has_code(code):
            raise UnknownLayerError(code, pos, name)
    return ArchSpec(name=name, layers=symbols)


def layer_names(spec: ArchSpec, alphabet: LayerAlphabet) -> list[str]:
    return [alphabet.name(c) for c in spec.layers]


def dump_spec(spec: ArchSpec, alphabet: LayerAlphabet) -> str:
    return json.dumps({"name": spec.name, "layers": layer_names(spec, alphabet)}, indent=1) + "\n"


def dump_alphabet(alphabet: LayerAlphabet) -> str:
    return json.dumps({k.name: k.code for k in alphabet}, indent=1) + "\n"


def load_spec_dir(path: Union[str, Path], alphabet: LayerAlphabet) -> list[ArchSpec]:
    """Load every ``*.json`` spec in ``path``, sorted by file name.

    Errors are re-raised with the offending file name prefixed.
    """
    specs = []
    for f in sorted(Path(path).glob("*.json")):
        try:
            specs.append(parse_spec(f.read_bytes(), alphabet))
        except SpecError as exc:
            raise SpecError(f"{f.name}: {exc}") from exc
    return specs


def _data_file(name: str):
    return resources.files("neurnkit") / "data" / name


def default_alphabet() -> LayerAlphabet:
    return parse_alphabet(_data_file("alphabet.json").read_bytes())


def fixture_specs(extra: bool = False) -> list[ArchSpec]:
    """The 12 bundled model specs; ``extra=True`` appends VGG16, ResNet101, DenseNet169."""
    alphabet = default_alphabet()
    dirs = ["specs", "specs_extra"] if extra else ["specs"]
    out = []
    for d in dirs:
        root = _data_file(d)
        for entry in sorted(root.iterdir(), key=lambda p: p.name):
            if entry.name.endswith(".json"):
                out.append(parse_spec(entry.read_bytes(), alphabet))
    return out
