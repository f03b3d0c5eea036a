"solvers: differentiable forward solvers for the channel PDEs"
