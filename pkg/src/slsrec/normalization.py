"""Terminology normalization for extracted platform/service/language names.

Extraction output drifts lexically ("JS" vs "JavaScript", "s3" vs "AWS S3");
a per-category alias table maps variants onto canonical names. Lookups are
case-insensitive, canonical names are fixed points, and unknown terms pass
through unchanged so novel services stay matchable verbatim.
"""

import json
from pathlib import Path

from .errors import ConfigurationError

CATEGORIES = ("platform", "service", "language")

DEFAULT_ALIASES: dict[str, dict[str, str]] = {
    "platform": {
        "lambda": "AWS Lambda",
        "amazon lambda": "AWS Lambda",
        "aws": "AWS Lambda",
        "google cloud functions": "Google Cloud Functions",
        "gcf": "Google Cloud Functions",
        "cloud functions": "Google Cloud Functions",
        "azure functions": "Azure Functions",
        "azure function": "Azure Functions",
        "microsoft azure functions": "Azure Functions",
        "openwhisk": "Apache OpenWhisk",
        "ibm cloud functions": "Apache OpenWhisk",
    },
    "service": {
        "s3": "AWS S3",
        "amazon s3": "AWS S3",
        "rekognition": "AWS Rekognition",
        "amazon rekognition": "AWS Rekognition",
        "dynamodb": "AWS DynamoDB",
        "amazon dynamodb": "AWS DynamoDB",
        "sqs": "AWS SQS",
        "amazon sqs": "AWS SQS",
        "sns": "AWS SNS",
        "amazon sns": "AWS SNS",
        "firestore": "Google Firestore",
        "google cloud firestore": "Google Firestore",
        "cloud storage": "Google Cloud Storage",
        "gcs": "Google Cloud Storage",
        "google storage": "Google Cloud Storage",
        "pub/sub": "Google Pub/Sub",
        "pubsub": "Google Pub/Sub",
        "cloud pub/sub": "Google Pub/Sub",
        "blob storage": "Azure Blob Storage",
        "azure blob": "Azure Blob Storage",
        "cosmos db": "Azure Cosmos DB",
        "cosmosdb": "Azure Cosmos DB",
        "azure cosmos": "Azure Cosmos DB",
    },
    "language": {
        "js": "JavaScript",
        "node": "JavaScript",
        "nodejs": "JavaScript",
        "node.js": "JavaScript",
        "ts": "TypeScript",
        "golang": "Go",
        "py": "Python",
        "python3": "Python",
        "c sharp": "C#",
        "csharp": "C#",
        "cs": "C#",
        "cpp": "C++",
        "c plus plus": "C++",
    },
}


class NormalizationTable:
    """Case-insensitive alias -> canonical maps, one per category."""

    def __init__(self, aliases: dict[str, dict[str, str]] | None = None):
        aliases = DEFAULT_ALIASES if aliases is None else aliases
        unknown = set(aliases) - set(CATEGORIES)
        if unknown:
            raise ConfigurationError(
                f"unknown normalization categories: {', '.join(sorted(unknown))}"
            )
        self._maps: dict[str, dict[str, str]] = {c: {} for c in CATEGORIES}
        for category in CATEGORIES:
            table = self._maps[category]
            for alias, canonical in aliases.get(category, {}).items():
                table[alias.casefold()] = canonical
            # canonical names must map to themselves
            for canonical in list(table.values()):
                key = canonical.casefold()
                if table.setdefault(key, canonical) != canonical:
                    raise ConfigurationError(
                        f"{category}: canonical name '{canonical}' is aliased "
                        f"to '{table[key]}'"
                    )

    def canonical(self, category: str, term: str) -> tuple[str, bool]:
        """Map one term; returns (canonical-or-unchanged, was_mapped)."""
        if category not in CATEGORIES:
            raise ConfigurationError(f"unknown category '{category}'")
        mapped = self._maps[category].get(term.casefold())
        if mapped is None:
            return term, False
        return mapped, True

    def normalize_terms(
        self, category: str, terms: set[str]
    ) -> tuple[set[str], set[str]]:
        """Map a term set; returns (canonical set, unmapped originals).

        Literal "None" entries are dropped: an empty section never turns
        into a "None" element.
        """
        out: set[str] = set()
        unmapped: set[str] = set()
        for term in terms:
            if term.casefold() == "none":
                continue
            canonical, was_mapped = self.canonical(category, term)
            out.add(canonical)
            if not was_mapped:
                unmapped.add(term)
        return out, unmapped


def load_table(path: str | Path) -> NormalizationTable:
    """Load a table from JSON: {"platform": {alias: canonical, ...}, ...}."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigurationError(f"cannot read normalization table {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid normalization table {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigurationError("normalization table must be a JSON object")
    return NormalizationTable(raw)
