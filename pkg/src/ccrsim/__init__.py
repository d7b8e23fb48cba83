"""Emergency-reflex reward shaping for multi-robot reinforcement learning."""
