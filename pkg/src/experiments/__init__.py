"""End-to-end workflows and ablation studies."""
