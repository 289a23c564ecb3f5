"""Conditional strategic axioms and the library that serves them.

An axiom is one heuristic in canonical conditional form: an "if" clause
(precondition) paired with a "then" clause (prescription), attributed to a
strategist and tradition and annotated with theme labels.

Corpus file format (UTF-8 JSON): a top-level object ``{"axioms": [...]}`` or
a bare list, one record per axiom with fields ``id``, ``strategist``,
``tradition``, ``precondition``, ``prescription``, ``tags`` (optional list)
and ``theme`` (optional). See ``data/meta_case.json`` for the bundled
starter corpus.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator

from .errors import InvariantError, LibraryError


class Strategist(str, Enum):
    MACHIAVELLI = "machiavelli"
    SUN_TZU = "sun_tzu"
    CLAUSEWITZ = "clausewitz"
    LIDDELL_HART = "liddell_hart"
    MARTIN = "martin"
    CUSTOM = "custom"


class Tradition(str, Enum):
    MILITARY_POLITICAL = "military_political"
    CORPORATE = "corporate"


#: Closed theme taxonomy; extend at runtime with :func:`register_theme`.
THEME_TAXONOMY: frozenset[str] = frozenset({
    "flexibility_under_uncertainty",
    "narrative_control",
    "indirect_maneuver",
    "timing_and_tempo",
    "resource_optimization",
    "structural_repositioning",
    "coalition_management",
    "crisis_transformation",
})

_custom_themes: set[str] = set()


def register_theme(label: str) -> None:
    """Register a custom theme label beyond the built-in taxonomy."""
    label = label.strip()
    if not label:
        raise InvariantError("theme label must be non-empty")
    _custom_themes.add(label)


def known_themes() -> frozenset[str]:
    """All currently valid theme labels (taxonomy plus registered customs)."""
    return THEME_TAXONOMY | frozenset(_custom_themes)


def parse_strategist(name: str) -> Strategist:
    """Parse a strategist name, tolerating case and separator variants.

    Accepts e.g. "Martin", "SunTzu", "sun_tzu", "LiddellHart".
    """
    normalized = name.strip().lower().replace("-", "").replace("_", "").replace(" ", "")
    table = {
        "machiavelli": Strategist.MACHIAVELLI,
        "suntzu": Strategist.SUN_TZU,
        "clausewitz": Strategist.CLAUSEWITZ,
        "liddellhart": Strategist.LIDDELL_HART,
        "martin": Strategist.MARTIN,
        "custom": Strategist.CUSTOM,
    }
    try:
        return table[normalized]
    except KeyError:
        raise InvariantError(f"unknown strategist: {name!r}") from None


def parse_tradition(name: str) -> Tradition:
    normalized = name.strip().lower()
    try:
        return Tradition(normalized)
    except ValueError:
        raise InvariantError(f"unknown tradition: {name!r}") from None


@dataclass(frozen=True)
class Axiom:
    """One conditional heuristic.

    ``full_text`` renders the canonical sentence
    ``"If {precondition}, then {prescription}."`` and is deterministic.
    """

    id: str
    strategist: Strategist
    tradition: Tradition
    precondition: str
    prescription: str
    tags: tuple[str, ...] = ()
    theme: str | None = None

    def __post_init__(self) -> None:
        if not self.id.strip():
            raise InvariantError("axiom id must be non-empty")
        object.__setattr__(self, "precondition", self.precondition.strip())
        object.__setattr__(self, "prescription", self.prescription.strip())
        if not self.precondition:
            raise InvariantError(f"axiom {self.id!r}: empty precondition clause")
        if not self.prescription:
            raise InvariantError(f"axiom {self.id!r}: empty prescription clause")
        object.__setattr__(self, "tags", tuple(self.tags))
        valid = known_themes()
        for tag in self.tags:
            if tag not in valid:
                raise InvariantError(
                    f"axiom {self.id!r}: tag {tag!r} is not a taxonomy or registered theme")
        if self.theme is not None and self.theme not in valid:
            raise InvariantError(
                f"axiom {self.id!r}: theme {self.theme!r} is not a taxonomy or registered theme")

    @property
    def full_text(self) -> str:
        return f"If {self.precondition}, then {self.prescription}."

    def to_record(self) -> dict:
        record: dict = {
            "id": self.id,
            "strategist": self.strategist.value,
            "tradition": self.tradition.value,
            "precondition": self.precondition,
            "prescription": self.prescription,
            "tags": list(self.tags),
        }
        if self.theme is not None:
            record["theme"] = self.theme
        return record


def render_full_text(axiom: Axiom) -> str:
    """Canonical conditional sentence for an axiom."""
    return axiom.full_text


def axiom_from_record(record: dict, context: str = "") -> Axiom:
    """Build and validate an Axiom from a plain record dict."""
    where = f" ({context})" if context else ""
    if not isinstance(record, dict):
        raise LibraryError(f"axiom record must be an object{where}")
    missing = [k for k in ("id", "strategist", "tradition", "precondition", "prescription")
               if k not in record]
    if missing:
        raise LibraryError(f"axiom record missing fields {missing}{where}")
    try:
        return Axiom(
            id=str(record["id"]),
            strategist=parse_strategist(str(record["strategist"])),
            tradition=parse_tradition(str(record["tradition"])),
            precondition=str(record["precondition"]),
            prescription=str(record["prescription"]),
            tags=tuple(record.get("tags", ())),
            theme=record.get("theme"),
        )
    except InvariantError as exc:
        raise LibraryError(f"{exc}{where}") from exc


@dataclass(frozen=True)
class SourceRecord:
    """Provenance of one loaded corpus file."""

    path: str
    sha256: str
    axiom_count: int


class AxiomLibrary:
    """An immutable, id-ordered collection of axioms.

    Iteration order is stable (sorted by id); duplicate ids are rejected at
    construction, so concurrent reads are safe without locking.
    """

    def __init__(self, axioms: Iterable[Axiom],
                 source_manifest: tuple[SourceRecord, ...] = ()):
        ordered = sorted(axioms, key=lambda a: a.id)
        seen: set[str] = set()
        for axiom in ordered:
            if axiom.id in seen:
                raise LibraryError(f"duplicate axiom id: {axiom.id!r}")
            seen.add(axiom.id)
        self._axioms: tuple[Axiom, ...] = tuple(ordered)
        self._by_id = {a.id: a for a in ordered}
        self.source_manifest = tuple(source_manifest)

    def __iter__(self) -> Iterator[Axiom]:
        return iter(self._axioms)

    def __len__(self) -> int:
        return len(self._axioms)

    def __contains__(self, axiom_id: str) -> bool:
        return axiom_id in self._by_id

    @property
    def axioms(self) -> tuple[Axiom, ...]:
        return self._axioms

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(a.id for a in self._axioms)

    def get(self, axiom_id: str) -> Axiom:
        try:
            return self._by_id[axiom_id]
        except KeyError:
            raise LibraryError(f"no axiom with id {axiom_id!r}") from None

    def subset(self, ids: Iterable[str]) -> "AxiomLibrary":
        """A new library holding exactly the named axioms."""
        return AxiomLibrary([self.get(i) for i in ids], self.source_manifest)

    def filter(self, strategist: str | Strategist | None = None,
               tradition: str | Tradition | None = None,
               tag: str | None = None) -> "AxiomLibrary":
        """Subset by strategist, tradition and/or tag, preserving order.

        Unknown strategist, tradition or theme-label names are rejected;
        a known label that no axiom carries yields an empty library.
        """
        keep = list(self._axioms)
        if strategist is not None:
            if isinstance(strategist, str):
                strategist = parse_strategist(strategist)
            keep = [a for a in keep if a.strategist is strategist]
        if tradition is not None:
            if isinstance(tradition, str):
                tradition = parse_tradition(tradition)
            keep = [a for a in keep if a.tradition is tradition]
        if tag is not None:
            if tag not in known_themes():
                raise InvariantError(
                    f"unknown tag {tag!r}: not a taxonomy or registered theme")
            keep = [a for a in keep if tag in a.tags or a.theme == tag]
        return AxiomLibrary(keep, self.source_manifest)

    def to_records(self) -> list[dict]:
        return [a.to_record() for a in self._axioms]


def filter_axioms(library: AxiomLibrary, strategist: str | None = None,
                  tradition: str | None = None, tag: str | None = None) -> AxiomLibrary:
    """Functional form of :meth:`AxiomLibrary.filter`."""
    return library.filter(strategist=strategist, tradition=tradition, tag=tag)


def load_library(path: str | Path) -> AxiomLibrary:
    """Load and validate an axiom corpus file.

    Raises :class:`LibraryError` with record context on parse failures,
    duplicate ids or empty clauses.
    """
    path = Path(path)
    if not path.exists():
        raise LibraryError(f"axiom corpus not found: {path}")
    raw = path.read_bytes()
    try:
        payload = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise LibraryError(f"cannot parse {path}: {exc}") from exc
    if isinstance(payload, dict) and "axioms" in payload:
        records = payload["axioms"]
    elif isinstance(payload, list):
        records = payload
    else:
        raise LibraryError(f"{path}: expected a list of axiom records or an 'axioms' key")
    if not isinstance(records, list):
        raise LibraryError(f"{path}: 'axioms' must be a list")
    axioms = [axiom_from_record(record, context=f"{path} record {index}")
              for index, record in enumerate(records)]
    manifest = (SourceRecord(path=str(path),
                             sha256=hashlib.sha256(raw).hexdigest(),
                             axiom_count=len(axioms)),)
    return AxiomLibrary(axioms, manifest)


def save_library(library: AxiomLibrary, path: str | Path) -> None:
    """Serialize a library back to the corpus file format."""
    payload = {"axioms": library.to_records()}
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def bundled_corpus_path() -> Path:
    """Path of the bundled starter corpus (the case-study axiom set)."""
    return Path(str(resources.files("entangle").joinpath("data/meta_case.json")))


def load_bundled_corpus() -> AxiomLibrary:
    return load_library(bundled_corpus_path())
