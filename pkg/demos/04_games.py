"""Play the security games against a few simple adversaries.

An honest challenger should hold every guessing adversary to an advantage
within three standard deviations of zero, and no forger should ever win.
Two deliberately leaky challengers show the games do notice a leak.

Run:  python demos/04_games.py [trials]   (at least 100)
"""

import random
import sys

from anonchan.harness import games

n = int(sys.argv[1]) if len(sys.argv) > 1 else 200
rng = random.Random(4)

results = [
    games.game_anonymity(games.RandomGuess(), n, rng),
    games.game_anonymity(games.ByteStatistics(), n, rng),
    games.game_semantic_security(games.SsRandomGuess(), n, rng),
    games.game_semantic_security(games.WrongKeyDecryptor(), n, rng),
    games.game_unforgeability(games.Replay(), n, rng),
    games.game_unforgeability(games.SimulatedTranscript(), n, rng),
    games.game_anonymity(games.ReplyToPort(), n, rng, leak=True),
    games.game_semantic_security(games.KeyGrab(), n, rng, hand_over_key=True),
]

print(f"{'game':<20}{'adversary':<24}{'wins':>6}{'advantage':>11}{'3 sigma':>9}")
for r in results:
    print(f"{r.game:<20}{r.adversary:<24}{r.wins:>6}{r.advantage:>11.4f}{r.threshold:>9.4f}")
print("\nthe last two rows use leaky challengers and should sit near 0.5")
