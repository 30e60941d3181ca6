"""Typed model of an AI Card: metadata plus nine sections.

Values are immutable. Collection fields are normalized on construction to
sorted, de-duplicated tuples so that structurally equal cards compare equal
and every serialization of a card is deterministic; list order in the
source document is not semantic. Constructors raise CardValidationError on
invariant violations.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from typing import Any, Optional

from aicards.errors import AICardsError

_SCHEME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")
_LANGTAG_RE = re.compile(r"^[A-Za-z]+(-[A-Za-z0-9]+)*$")


class CardValidationError(AICardsError):
    """A card value violates one of its structural invariants."""


def _req(condition: bool, message: str) -> None:
    if not condition:
        raise CardValidationError(message)


def _set(obj: Any, name: str, value: Any) -> None:
    object.__setattr__(obj, name, value)


def _str_tuple(values: Any, what: str) -> tuple[str, ...]:
    out = []
    for v in values:
        _req(isinstance(v, str), f"{what} entries must be strings")
        out.append(v)
    return tuple(sorted(set(out)))


class Level(str, Enum):
    """5-point ordinal scale for likelihood, severity, and residual risk."""

    VERY_LOW = "VeryLow"
    LOW = "Low"
    MODERATE = "Moderate"
    HIGH = "High"
    VERY_HIGH = "VeryHigh"

    @property
    def rank(self) -> int:
        return _LEVEL_RANKS[self]


_LEVEL_RANKS = {level: i for i, level in enumerate(Level)}


class ImpactArea(str, Enum):
    HEALTH_AND_SAFETY = "HealthAndSafety"
    FUNDAMENTAL_RIGHTS = "FundamentalRights"
    SOCIETY = "Society"
    ENVIRONMENT = "Environment"


class MeasureFlag(str, Enum):
    TECHNICAL = "Technical"
    HUMAN_OVERSIGHT = "HumanOversight"
    CYBERSECURITY = "Cybersecurity"
    TRANSPARENCY = "Transparency"
    LOGGING = "Logging"


class AutomationLevel(str, Enum):
    FULLY_AUTONOMOUS = "FullyAutonomous"
    HIGH_AUTOMATION = "HighAutomation"
    CONDITIONAL_AUTOMATION = "ConditionalAutomation"
    PARTIAL_AUTOMATION = "PartialAutomation"
    FULLY_HUMAN_CONTROLLED = "FullyHumanControlled"


class ActorRole(str, Enum):
    END_USER = "EndUser"
    AI_SUBJECT = "AISubject"


class ControlLevel(str, Enum):
    CAN_OPT_IN = "CanOptIn"
    CAN_OPT_OUT = "CanOptOut"
    CAN_CHALLENGE = "CanChallenge"
    CAN_CORRECT = "CanCorrect"
    CAN_REVERSE_EX_POST = "CanReverseExPost"
    CANNOT_OPT_OUT = "CannotOptOut"


@dataclass(frozen=True, slots=True)
class Modality:
    """System modality; a closed value or a free-form 'other' label."""

    value: str
    is_other: bool = False

    CLOSED = ("StandaloneSoftware", "SafetyComponentOfProduct", "EmbeddedInProduct")

    def __post_init__(self) -> None:
        if self.is_other:
            _req(bool(self.value), "other-modality label must be nonempty")
        else:
            _req(self.value in self.CLOSED, f"unknown modality {self.value!r}")

    @classmethod
    def other(cls, label: str) -> "Modality":
        return cls(label, is_other=True)

    def sort_key(self) -> tuple:
        return (self.is_other, self.value)


@dataclass(frozen=True, slots=True)
class ComponentKind:
    value: str
    is_other: bool = False

    CLOSED = ("Model", "Dataset", "GeneralPurposeAISystem", "Software")

    def __post_init__(self) -> None:
        if self.is_other:
            _req(bool(self.value), "other-component-kind label must be nonempty")
        else:
            _req(self.value in self.CLOSED, f"unknown component kind {self.value!r}")

    @classmethod
    def other(cls, label: str) -> "ComponentKind":
        return cls(label, is_other=True)

    def sort_key(self) -> tuple:
        return (self.is_other, self.value)


@dataclass(frozen=True, slots=True)
class InfoSheetKind:
    value: str
    is_other: bool = False

    CLOSED = ("Datasheet", "ModelCard", "AIFactsheet")

    def __post_init__(self) -> None:
        if self.is_other:
            _req(bool(self.value), "other-info-sheet label must be nonempty")
        else:
            _req(self.value in self.CLOSED, f"unknown info sheet kind {self.value!r}")

    @classmethod
    def other(cls, label: str) -> "InfoSheetKind":
        return cls(label, is_other=True)

    def sort_key(self) -> tuple:
        return (self.is_other, self.value)


@dataclass(frozen=True, slots=True)
class CardMetadata:
    card_version: str
    issuance_date: date
    language: str
    publisher: str
    contact: str
    machine_readable_spec_url: str

    def __post_init__(self) -> None:
        _req(bool(self.card_version), "meta.cardVersion must be nonempty")
        _req(isinstance(self.issuance_date, date), "meta.issuanceDate must be a date")
        _req(bool(_LANGTAG_RE.match(self.language)), f"meta.language is not a BCP 47 tag: {self.language!r}")
        _req(bool(self.publisher), "meta.publisher must be nonempty")
        _req(bool(self.contact), "meta.contact must be nonempty")
        _req(
            bool(_SCHEME_RE.match(self.machine_readable_spec_url)),
            "meta.machineReadableSpecUrl must be an absolute IRI",
        )


@dataclass(frozen=True, slots=True)
class OrganisationRef:
    name: str
    url: Optional[str] = None

    def __post_init__(self) -> None:
        _req(bool(self.name), "organisation name must be nonempty")
        if self.url is not None:
            _req(bool(_SCHEME_RE.match(self.url)), f"organisation url must be an absolute IRI: {self.url!r}")

    def sort_key(self) -> tuple:
        return (self.name, self.url or "")


@dataclass(frozen=True, slots=True)
class GeneralInfo:
    system_name: str
    system_version: str
    modality: Modality
    ai_techniques: tuple[str, ...] = ()
    providers: tuple[OrganisationRef, ...] = ()
    developers: tuple[OrganisationRef, ...] = ()

    def __post_init__(self) -> None:
        _req(bool(self.system_name), "general.systemName must be nonempty")
        _set(self, "ai_techniques", _str_tuple(self.ai_techniques, "general.aiTechniques"))
        _set(self, "providers", tuple(sorted(set(self.providers), key=OrganisationRef.sort_key)))
        _set(self, "developers", tuple(sorted(set(self.developers), key=OrganisationRef.sort_key)))
        _req(len(self.providers) >= 1, "general.providers must name at least one provider")


@dataclass(frozen=True, slots=True)
class IntendedUse:
    domain: str
    purpose: str
    capability: str
    deployer: str
    subjects: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for name in ("domain", "purpose", "capability", "deployer"):
            _req(bool(getattr(self, name)), f"intendedUse.{name} must be nonempty")
        _set(self, "subjects", _str_tuple(self.subjects, "intendedUse.subjects"))


@dataclass(frozen=True, slots=True)
class ComponentRef:
    name: str
    version: str
    kind: ComponentKind
    doc_link_or_id: str
    info_sheet_kind: Optional[InfoSheetKind] = None

    def __post_init__(self) -> None:
        _req(bool(self.name), "component name must be nonempty")
        _req(bool(self.doc_link_or_id), "component docLinkOrId must be nonempty")

    def sort_key(self) -> tuple:
        return (
            self.name,
            self.version,
            self.kind.sort_key(),
            self.doc_link_or_id,
            self.info_sheet_kind.sort_key() if self.info_sheet_kind else (),
        )


@dataclass(frozen=True, slots=True)
class DataProcessing:
    processes_personal_data: bool
    personal_data_categories: tuple[str, ...] = ()
    dpia_conducted: Optional[bool] = None
    includes_non_personal_data: bool = False
    includes_anonymised_data: bool = False
    includes_licenced_data: bool = False

    def __post_init__(self) -> None:
        _set(
            self,
            "personal_data_categories",
            _str_tuple(self.personal_data_categories, "dataProcessing.personalDataCategories"),
        )
        _req(
            bool(self.personal_data_categories) == self.processes_personal_data,
            "dataProcessing.personalDataCategories must be nonempty iff personal data is processed",
        )
        if self.dpia_conducted is not None:
            _req(
                self.processes_personal_data,
                "dataProcessing.dpiaConducted only applies when personal data is processed",
            )


@dataclass(frozen=True, slots=True)
class ActorInvolvement:
    intended: bool
    active: bool
    informed: bool
    control_level: ControlLevel


@dataclass(frozen=True, slots=True)
class HumanInvolvement:
    automation_level: AutomationLevel
    end_user: ActorInvolvement
    subject: ActorInvolvement


@dataclass(frozen=True, slots=True)
class AreaSummary:
    area: ImpactArea
    likelihood: Level
    severity: Level
    residual_risk: Level

    def sort_key(self) -> tuple:
        return (self.area.value,)


@dataclass(frozen=True, slots=True)
class Impact:
    area: ImpactArea
    description: str = ""

    def sort_key(self) -> tuple:
        return (self.area.value, self.description)


@dataclass(frozen=True, slots=True)
class Measure:
    label: str
    flag: MeasureFlag

    def __post_init__(self) -> None:
        _req(bool(self.label), "measure label must be nonempty")

    def sort_key(self) -> tuple:
        return (self.label, self.flag.value)


@dataclass(frozen=True, slots=True)
class RiskEntry:
    id: str
    label: str
    likelihood: Level
    severity: Level
    residual_risk: Level
    sources: tuple[str, ...] = ()
    consequences: tuple[str, ...] = ()
    impacts: tuple[Impact, ...] = ()
    measures: tuple[Measure, ...] = ()

    def __post_init__(self) -> None:
        _req(bool(_SCHEME_RE.match(self.id)), f"risk id must be an absolute IRI: {self.id!r}")
        _req(bool(self.label), "risk label must be nonempty")
        _set(self, "sources", _str_tuple(self.sources, "risk.sources"))
        _set(self, "consequences", _str_tuple(self.consequences, "risk.consequences"))
        _set(self, "impacts", tuple(sorted(set(self.impacts), key=Impact.sort_key)))
        _set(self, "measures", tuple(sorted(set(self.measures), key=Measure.sort_key)))
        _req(len(self.impacts) >= 1, f"risk {self.id} must name at least one impact")


@dataclass(frozen=True, slots=True)
class RiskProfile:
    summary: tuple[AreaSummary, ...] = ()
    measure_flags: frozenset[MeasureFlag] = frozenset()
    risks: tuple[RiskEntry, ...] = ()

    def __post_init__(self) -> None:
        _set(self, "summary", tuple(sorted(set(self.summary), key=AreaSummary.sort_key)))
        _set(self, "measure_flags", frozenset(self.measure_flags))
        _set(self, "risks", tuple(sorted(self.risks, key=lambda r: r.id)))
        areas = [s.area for s in self.summary]
        _req(len(areas) == len(set(areas)), "riskProfile.summary keys each impact area at most once")
        ids = [r.id for r in self.risks]
        _req(len(ids) == len(set(ids)), "riskProfile.risks ids must be unique")

    def summary_for(self, area: ImpactArea) -> Optional[AreaSummary]:
        for s in self.summary:
            if s.area == area:
                return s
        return None


@dataclass(frozen=True, slots=True)
class QualityMetric:
    dimension: str
    score: float
    note: Optional[str] = None

    def __post_init__(self) -> None:
        _req(bool(self.dimension), "quality dimension must be nonempty")
        _req(
            isinstance(self.score, (int, float)) and 0.0 <= float(self.score) <= 1.0,
            f"quality score must be within [0, 1]: {self.score!r}",
        )
        _set(self, "score", float(self.score))

    def sort_key(self) -> tuple:
        return (self.dimension,)


@dataclass(frozen=True, slots=True)
class PredeterminedChange:
    subject_of_change: str
    frequency: str = ""
    impact_on_performance_and_risks: str = ""

    def __post_init__(self) -> None:
        _req(bool(self.subject_of_change), "predetermined change subject must be nonempty")

    def sort_key(self) -> tuple:
        return (self.subject_of_change, self.frequency, self.impact_on_performance_and_risks)


@dataclass(frozen=True, slots=True)
class ComplianceInfo:
    regulations: tuple[str, ...] = ()
    standards: tuple[str, ...] = ()
    codes_of_conduct: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        _set(self, "regulations", _str_tuple(self.regulations, "compliance.regulations"))
        _set(self, "standards", _str_tuple(self.standards, "compliance.standards"))
        _set(self, "codes_of_conduct", _str_tuple(self.codes_of_conduct, "compliance.codesOfConduct"))


@dataclass(frozen=True, eq=True)
class AICard:
    """One card: metadata plus the nine sections, documenting one intended use.

    ``extensions`` is an opaque forward-compatibility bag: a mapping from a
    dotted placement key (``"intendedUse.reviewCycle"``, or a bare key for
    document-level entries such as ``"policy"``) to any JSON-compatible
    value. It is carried through every serialization untouched.
    """

    meta: CardMetadata
    general: GeneralInfo
    intended_use: IntendedUse
    components: tuple[ComponentRef, ...] = ()
    data_processing: DataProcessing = DataProcessing(False)
    human_involvement: HumanInvolvement = HumanInvolvement(
        AutomationLevel.FULLY_HUMAN_CONTROLLED,
        ActorInvolvement(True, True, True, ControlLevel.CAN_OPT_OUT),
        ActorInvolvement(True, True, True, ControlLevel.CAN_OPT_OUT),
    )
    risk_profile: RiskProfile = RiskProfile()
    quality: tuple[QualityMetric, ...] = ()
    predetermined_changes: tuple[PredeterminedChange, ...] = ()
    compliance: ComplianceInfo = ComplianceInfo()
    extensions: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        _set(self, "components", tuple(sorted(set(self.components), key=ComponentRef.sort_key)))
        _set(self, "quality", tuple(sorted(set(self.quality), key=QualityMetric.sort_key)))
        _set(
            self,
            "predetermined_changes",
            tuple(sorted(set(self.predetermined_changes), key=PredeterminedChange.sort_key)),
        )
        dims = [q.dimension for q in self.quality]
        _req(len(dims) == len(set(dims)), "quality dimensions must be unique")
        _req(isinstance(self.extensions, dict), "extensions must be a mapping")

    def quality_score(self, dimension: str) -> Optional[float]:
        for q in self.quality:
            if q.dimension == dimension:
                return q.score
        return None


def issued_in_future(meta: CardMetadata, now: Optional[date] = None) -> bool:
    """True when the issuance date lies after `now` (defaults to today)."""
    return meta.issuance_date > (now or date.today())
