"""
Test suite for the fetal orientation pipeline

- Mask morphology against brute-force oracles
- Presentation templates and sweep voting
- Lie landmarks, fallback criteria and frame voting
- Exam bundle I/O, synthetic generation, reports, CLI and figures
- Synthetic accuracy benchmarks (marked slow)
"""
