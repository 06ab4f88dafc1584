"""Robust dynamic diagnosis filters for stealthy false-data injection
attacks on closed-loop LTI systems, validated on a multi-area AGC model.

Pipeline: build the continuous closed-loop AGC model (`agc`), discretize it
(`discretize`), fit the DAE form and stacked design matrices (`dae`),
characterize stealthy attacks (`attacks`), solve the maximin filter design
(`design`), realize and run both detectors (`residual`, `simulate`). The
`cli` module ties it together behind one config file.
"""

__version__ = "0.1.0"
