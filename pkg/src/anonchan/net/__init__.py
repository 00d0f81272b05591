from .client import (
    SessionError,
    SessionRefused,
    SessionResult,
    SessionTimeout,
    UserConfig,
    precompute_request,
    request_decryption_key,
    request_join,
    user_client_session,
    user_session,
)
from .deploy import LocalDeployment
from .services import (
    GmConfig,
    GmService,
    KgcConfig,
    KgcService,
    ProxyConfig,
    ProxyService,
    SpConfig,
    SpService,
    run_gm_service,
    run_kgc_service,
    run_proxy,
    run_sp,
)
from .wire import ErrorCode, FrameError, MsgType, decode_frame, encode_frame
