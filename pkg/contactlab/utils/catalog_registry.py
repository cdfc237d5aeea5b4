import copy
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple

from jsonschema import Draft7Validator

from config.settings import settings

logger = logging.getLogger(__name__)


class UnknownCatalogEntryError(LookupError):
    """Requested catalog entry does not exist"""

    def __init__(self, name: str, suggestions: List[str]):
        hint = f"; did you mean {', '.join(suggestions)}?" if suggestions else ""
        super().__init__(f"Unknown catalog entry '{name}'{hint}")
        self.name = name
        self.suggestions = suggestions


class CatalogFormatError(ValueError):
    """The catalog file violates the entry schema"""


# ========= Schemas =========

IMMERSION_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": ["variables", "components", "domain"],
    "properties": {
        "variables": {
            "type": "array",
            "items": {"type": "string", "pattern": "^[A-Za-z_][A-Za-z0-9_]*$"},
            "minItems": 1,
            "uniqueItems": True,
        },
        "components": {"type": "array", "items": {"type": "string", "minLength": 1}, "minItems": 3},
        "domain": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        },
        "exclusions": {"type": "array", "items": {"type": "string", "minLength": 1}},
        "degeneracies": {"type": "array", "items": {"type": "string", "minLength": 1}},
    },
    "additionalProperties": False,
}

SPLIT_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": ["D", "Dtheta"],
    "properties": {
        "D": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        "Dtheta": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
    },
    "additionalProperties": False,
}

WARP_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": ["base_vars", "fiber_vars", "reference_point"],
    "properties": {
        "base_vars": {"type": "array", "items": {"type": "string"}, "minItems": 1, "uniqueItems": True},
        "fiber_vars": {"type": "array", "items": {"type": "string"}, "minItems": 1, "uniqueItems": True},
        "reference_point": {"type": "array", "items": {"type": "number"}, "minItems": 1},
    },
    "additionalProperties": False,
}

ENTRY_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": ["name", "description", "ambient", "immersion"],
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "description": {"type": "string"},
        "ambient": {
            "type": "object",
            "required": ["name", "n"],
            "properties": {
                "name": {"type": "string"},
                "n": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "immersion": IMMERSION_SCHEMA,
        "split": SPLIT_SCHEMA,
        "warp": WARP_SCHEMA,
        "suites": {"type": "array", "items": {"type": "string"}, "uniqueItems": True},
    },
    "additionalProperties": False,
}

CATALOG_SCHEMA: Dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "array",
    "items": ENTRY_SCHEMA,
}


def json_pointer(path: Iterable[Any]) -> str:
    """RFC 6901 pointer for a jsonschema / pydantic location path"""
    parts = [str(part).replace("~", "~0").replace("/", "~1") for part in path]
    return "/" + "/".join(parts) if parts else ""


def schema_errors(document: Any, schema: Dict[str, Any]) -> List[Tuple[str, str]]:
    """All (JSON pointer, message) violations, ordered by location"""
    validator = Draft7Validator(schema)
    errors = sorted(validator.iter_errors(document), key=lambda e: list(map(str, e.absolute_path)))
    return [(json_pointer(e.absolute_path), e.message) for e in errors]


class CatalogRegistry:
    """
    Loads and validates the built-in immersion catalog.
    Handles loose name matching (case, '-', '_' and space variants) and
    suggestions for unknown names.
    """

    def __init__(self, catalog_file: str = settings.CATALOG_FILE):
        self.catalog_file = catalog_file
        self.entries = self._load_entries()
        self._create_mapping()

    def _load_entries(self) -> List[Dict[str, Any]]:
        """Load catalog entries from JSON file"""
        catalog_path = Path(self.catalog_file)
        if not catalog_path.exists():
            catalog_path = Path(__file__).parent.parent / self.catalog_file

        with open(catalog_path, 'r') as f:
            entries = json.load(f)

        problems = schema_errors(entries, CATALOG_SCHEMA)
        if problems:
            for pointer, message in problems:
                logger.error(f"❌ Catalog entry invalid at {pointer}: {message}")
            raise CatalogFormatError(f"{catalog_path}: {len(problems)} schema violation(s), first at {problems[0][0]}")

        if not entries:
            raise CatalogFormatError("Empty catalog")

        logger.debug(f"📚 Loaded {len(entries)} catalog entries from {catalog_path}")
        return entries

    def _create_mapping(self):
        """Create mapping for loose name matching"""
        self.name_mapping = {}
        for entry in self.entries:
            name = entry["name"]
            for variation in self._generate_variations(name):
                self.name_mapping[variation] = name

    def _generate_variations(self, name: str) -> List[str]:
        lowered = name.lower().strip()
        variations = {
            lowered,
            lowered.replace('_', '-'),
            lowered.replace('_', ' '),
            lowered.replace('_', ''),
        }
        return list(variations)

    def is_known(self, name: str) -> bool:
        return self.normalize_name(name) is not None

    def normalize_name(self, name: str) -> Optional[str]:
        """Normalize an entry name to its canonical spelling"""
        if not name:
            return None
        clean_name = name.strip()
        if any(entry["name"] == clean_name for entry in self.entries):
            return clean_name
        return self.name_mapping.get(clean_name.lower())

    def get_entry(self, name: str) -> Dict[str, Any]:
        """Deep copy of a catalog entry"""
        normalized = self.normalize_name(name)
        if normalized is None:
            raise UnknownCatalogEntryError(name, self._get_suggestions(name))
        for entry in self.entries:
            if entry["name"] == normalized:
                return copy.deepcopy(entry)
        raise UnknownCatalogEntryError(name, [])

    def list_entries(self, name_filter: str = "") -> List[Tuple[str, str]]:
        """(name, description) pairs in file order; an empty filter returns all"""
        needle = (name_filter or "").lower().strip()
        return [
            (entry["name"], entry["description"])
            for entry in self.entries
            if needle in entry["name"].lower() or needle in entry["description"].lower()
        ]

    def get_entry_info(self, name: str) -> Dict[str, Any]:
        normalized = self.normalize_name(name)
        if not normalized:
            return {
                "known": False,
                "normalized_name": None,
                "suggestions": self._get_suggestions(name),
            }
        return {
            "known": True,
            "normalized_name": normalized,
            "original_input": name,
            "suggestions": [],
        }

    def _get_suggestions(self, name: str, limit: int = 3) -> List[str]:
        """Get suggestions for unknown entry names"""
        if not name:
            return []
        suggestions = []
        input_lower = name.lower()
        for entry in self.entries:
            entry_lower = entry["name"].lower()
            if (input_lower in entry_lower or
                    entry_lower in input_lower or
                    self._similar_words(input_lower, entry_lower)):
                suggestions.append(entry["name"])
        return suggestions[:limit]

    def _similar_words(self, word1: str, word2: str) -> bool:
        """Shared three-letter substring"""
        if len(word1) < 3 or len(word2) < 3:
            return False
        for i in range(len(word1) - 2):
            if word1[i:i + 3] in word2:
                return True
        return False


# Global instance for easy importing
catalog_registry = CatalogRegistry()

__all__ = [
    'CatalogRegistry',
    'CatalogFormatError',
    'UnknownCatalogEntryError',
    'IMMERSION_SCHEMA',
    'SPLIT_SCHEMA',
    'WARP_SCHEMA',
    'ENTRY_SCHEMA',
    'CATALOG_SCHEMA',
    'catalog_registry',
    'json_pointer',
    'schema_errors',
]
