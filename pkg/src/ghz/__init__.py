"""GHZ-basis bookkeeping and the random-parity verification game."""
