"""Dense state-vector and stabilizer-tableau simulation backends."""
