"""The identity catalogue and the verification engine."""
from .registry import (FORMAL, IdentityDescriptor, ParamBinding, ParamSpec, VerificationReport,
                       build_side, default_param_suite, get_identity, list_identities,
                       verify_identity)

__all__ = [
    "FORMAL", "IdentityDescriptor", "ParamBinding", "ParamSpec", "VerificationReport",
    "build_side", "default_param_suite", "get_identity", "list_identities", "verify_identity",
]
