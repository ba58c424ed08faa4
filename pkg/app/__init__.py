# Quantum dot potential optimizer
