from passgraph.synthetic.generator import (
    GeneratorConfig,
    SuccessModel,
    UtilityWeights,
    expert_choice,
    expert_utilities,
    generate_dataset,
    generate_pass,
    generate_state,
)
