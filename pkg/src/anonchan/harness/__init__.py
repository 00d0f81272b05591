from .bench import ALGORITHMS, BenchReport, bench_algorithms, bench_session, consistency
from .games import (
    BitFlip,
    ByteStatistics,
    GameResult,
    KeyGrab,
    RandomBytes,
    RandomGuess,
    Replay,
    ReplyToPort,
    SimulatedTranscript,
    SsByteStatistics,
    SsRandomGuess,
    WrongKeyDecryptor,
    game_anonymity,
    game_semantic_security,
    game_unforgeability,
    three_sigma,
)
from .zk import check_extractor, check_zero_knowledge, sdh_holds
