from .dialogue import (
    MIN_PREVIOUS_TURNS,
    NEUTRAL,
    Dialogue,
    DialogueSample,
    DialogueTurn,
    filter_dialogues,
    read_dialogues,
    sample_to_condition,
    write_dialogues,
)
from .envpersona import (
    PERSONA_TRAITS,
    SEED_EMOTIONS,
    SITUATIONS_PER_EMOTION,
    EnvPersonaDataset,
    EnvPersonaPair,
    synthesize_envpersona,
)
from .planning import (
    Agent,
    ConditionTuple,
    PlanResult,
    build_prompt,
    plan,
    plan_many,
)
from .templates import (
    GRANULARITIES,
    PLAN_TEMPLATE_IDS,
    UTILITY_TEMPLATE_IDS,
    PromptTemplate,
    load_examples,
    load_template,
)

__all__ = [
    "GRANULARITIES",
    "MIN_PREVIOUS_TURNS",
    "NEUTRAL",
    "PERSONA_TRAITS",
    "PLAN_TEMPLATE_IDS",
    "SEED_EMOTIONS",
    "SITUATIONS_PER_EMOTION",
    "UTILITY_TEMPLATE_IDS",
    "Agent",
    "ConditionTuple",
    "Dialogue",
    "DialogueSample",
    "DialogueTurn",
    "EnvPersonaDataset",
    "EnvPersonaPair",
    "PlanResult",
    "PromptTemplate",
    "build_prompt",
    "filter_dialogues",
    "load_examples",
    "load_template",
    "plan",
    "plan_many",
    "read_dialogues",
    "sample_to_condition",
    "synthesize_envpersona",
    "write_dialogues",
]
