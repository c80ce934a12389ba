"""Even-Mansour and Feistel ciphers over finite groups, with the attacks,
security games and advantage bounds needed to exercise them at desk scale."""

from .attacks import (
    SlideConfig,
    Verdict,
    default_slide_config,
    distinguish_f1,
    distinguish_f2,
    distinguish_f3_sprp,
    slide_attack,
    verify_key,
)
from .em import EmInstance, em_keygen, make_em_instance
from .errors import (
    BudgetError,
    CapacityError,
    CodecError,
    ConfigError,
    DomainError,
    GroupSpecError,
    ProtocolError,
    UnsupportedKindError,
)
from .feistel import (
    FeistelEmInstance,
    FeistelPair,
    feistel_apply,
    feistel_round,
    feistel_unround,
    make_feistel_em,
    random_round_functions,
)
from .games import (
    AdvantageEstimate,
    CipherRecord,
    GameFlag,
    QueryBudget,
    REFUSED,
    Transcript,
    check_consistency,
    count_bad_keys,
    detect_bad,
    detect_badg,
    em_bad_key_bound,
    estimate_advantage,
    exhaustive_game_equivalence,
    fem_advantage_bound,
    fem_advantage_bound_total,
    run_cp,
    run_efp,
    run_game,
)
from .groups import (
    ENUMERATION_CAP,
    DihedralGroup,
    Element,
    GroupHandle,
    ProductGroup,
    SymGroup,
    XorGroup,
    ZmodGroup,
    parse_group_spec,
)
from .oracles import LazyFunction, LazyPermutation, derive_seed, fully_sampled_permutation, spawn

__all__ = [name for name in dir() if not name.startswith("_")]
