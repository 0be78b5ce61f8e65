"""cvemap: map CVEs to MITRE ATT&CK techniques per mapping type.

Combines rule-table prompting over the CVE mapping methodology with many-shot
in-context learning against a pluggable LLM backend, merges both routes into
ranked per-mapping-type predictions, and evaluates them with ranked and
unranked metrics.
"""

__version__ = "0.1.0"

from .types import (  # noqa: F401
    CveRecord,
    GroundTruthMapping,
    MappingType,
    NONE_LABEL,
    PAD_LABEL,
    RankedList,
    TechniqueRef,
)
