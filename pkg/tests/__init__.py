"""
Tests Module - Unit tests for kbembed

Test Modules:
- test_kb.py: Vocabulary, triple loading, stores, relation metadata
- test_models.py: Scoring, gradients, initialization, composition
- test_trainer.py: Margin loss, AdaGrad, sampling, training loop
- test_evaluation.py: Ranks, metrics, MAP against brute force
- test_rules.py: Sequence enumeration, instantiation, EmbedRule
- test_tools.py: File tools, checkpoints, reports, exports
- test_config.py: Run files, presets, environment settings
- test_telemetry.py: Run manifests, drift, report generator
- test_orchestrator.py: Pipeline graph and commands
- test_main.py: CLI parsing and exit codes
- test_acceptance.py: Synthetic experiments (slow)
"""

# Test utilities can be imported from conftest.py fixtures

__all__ = []
