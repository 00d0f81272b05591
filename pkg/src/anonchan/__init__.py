"""Anonymous authenticated channels from group signatures and identity-based encryption."""

from .groupsig import gs_extract, gs_join, gs_setup, gs_sign, gs_simulate, gs_verify, Verdict
from .ibe import ibe_decrypt, ibe_encrypt, ibe_extract, ibe_setup
from .pairing import DecodeError, default_context
from .protocol import (
    Address,
    IdIpTable,
    TempId,
    get_content,
    gm_setup,
    join,
    kgc_setup,
    relay_content,
    relay_request,
    send_content,
    send_request,
    user_key_gen,
    validity_check,
)

__version__ = "0.1.0"
