"""Two-party homomorphic verification protocol."""

from .elgamal import (
    MultiplicativeCiphertext,
    MultiplicativePublicKey,
    MultiplicativeSecretKey,
    mult_decrypt,
    mult_encrypt,
    mult_keygen,
    mult_multiply,
    mult_rerandomize_by_one,
)
from .engine import (
    MaskPair,
    ProtocolDecision,
    ProtocolKeys,
    SecurityParams,
    client_round1_encrypt_query,
    client_round3_mask_permute,
    client_round5_decrypt_reveal,
    draw_masks,
    limb_schedule,
    run_protocol,
    server_decide,
    server_round2_encrypted_correlations,
    server_round4_blind_threshold,
    validate_mask_range,
)
from .paillier import (
    AdditivePublicKey,
    AdditiveSecretKey,
    additive_add,
    additive_decrypt,
    additive_encrypt,
    additive_keygen,
    additive_scalar_mul,
)
from .transcript import CLIENT, SERVER, ProtocolMessage, ProtocolTranscript, decode_message

__all__ = [
    "AdditivePublicKey",
    "AdditiveSecretKey",
    "CLIENT",
    "MaskPair",
    "MultiplicativeCiphertext",
    "MultiplicativePublicKey",
    "MultiplicativeSecretKey",
    "ProtocolDecision",
    "ProtocolKeys",
    "ProtocolMessage",
    "ProtocolTranscript",
    "SERVER",
    "SecurityParams",
    "additive_add",
    "additive_decrypt",
    "additive_encrypt",
    "additive_keygen",
    "additive_scalar_mul",
    "client_round1_encrypt_query",
    "client_round3_mask_permute",
    "client_round5_decrypt_reveal",
    "decode_message",
    "draw_masks",
    "limb_schedule",
    "mult_decrypt",
    "mult_encrypt",
    "mult_keygen",
    "mult_multiply",
    "mult_rerandomize_by_one",
    "run_protocol",
    "server_decide",
    "server_round2_encrypted_correlations",
    "server_round4_blind_threshold",
    "validate_mask_range",
]
