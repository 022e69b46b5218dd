"""
Static model and scenario constants for the arm-robot experiments.
"""

# One-link arm: states (θ, θ̇), torque input, angle output
ONE_LINK = {
    'A': [[0.0, 1.0], [-14.7, 0.0]],
    'B': [[0.0], [3.0]],
    'C': [[1.0, 0.0]],
    'D': [[0.0]],
    'K': [[61.77, 9.64]],
    'precomp': [[66.67]],
    'sample_time': 0.01,
    'y_bound': [45.0],
    'horizon': 25,
}

# Two-link arm: states (θ1, θ2, θ̇1, θ̇2), two joint torques, both angles constrained
TWO_LINK = {
    'A': [[0.0, 0.0, 1.0, 0.0],
          [0.0, 0.0, 0.0, 1.0],
          [-0.46, -0.62, 0.0, 0.0],
          [0.25, -6.62, 0.0, 0.0]],
    'B': [[0.0, 0.0],
          [0.0, 0.0],
          [0.78, -0.04],
          [0.04, 0.13]],
    'C': [[1.0, 0.0, 0.0, 0.0],
          [0.0, 1.0, 0.0, 0.0]],
    'D': [[0.0, 0.0], [0.0, 0.0]],
    'K': [[750.0, 155.0, 59.0, 19.0],
          [-226.0, 2867.0, -18.0, 350.0]],
    'precomp': [[769.23, 0.0], [0.0, 3333.3]],
    'sample_time': 0.01,
    'y_bound': [60.0, 60.0],
    'horizons': [40, 40],
}

# Joint-torque disturbance on the one-link arm; it enters through the
# closed-loop input matrix
ONE_LINK_DISTURBANCE = {
    'bound': 0.1,
    'horizons': [20, 50],
}

# Mixing matrix for the uncertain-preview scenario (N=4); equals λ = (0.9, 0.75, 0.45, 0.1)
LAMBDA_PRESET = [
    [0.1, 0.9, 0.0, 0.0, 0.0],
    [0.1, 0.15, 0.75, 0.0, 0.0],
    [0.1, 0.15, 0.3, 0.45, 0.0],
    [0.1, 0.15, 0.3, 0.35, 0.1],
    [0.1, 0.15, 0.3, 0.35, 0.1],
]
LAMBDA_PRESET_VALUES = [0.9, 0.75, 0.45, 0.1]

# Reference breakpoints (time, value per channel); the switching times and the
# intermediate angles are estimates read off the recorded runs
ONE_LINK_REFERENCE = [
    (0.0, [0.0]),
    (0.3, [60.0]),
    (0.5, [0.0]),
    (0.7, [-69.0]),
    (0.9, [0.0]),
]
ONE_LINK_STEPS = 150

LAMBDA_REFERENCE = [
    (0.0, [0.0]),
    (0.1, [40.0]),
    (0.21, [0.0]),
]
# Preview entries inside a window report its value instead of the actual one: the
# drop at 0.21 is previewed as a continued 40 and the sample at 0.25 as 60
LAMBDA_CORRUPTION = [(0.21, 0.25, [40.0]), (0.25, 0.26, [60.0])]
LAMBDA_STEPS = 60

TWO_LINK_REFERENCE = [
    (0.0, [0.0, 0.0]),
    (0.5, [80.0, 0.0]),
    (1.0, [80.0, -56.0]),
    (1.2, [0.0, -20.0]),
    (1.6, [0.0, 0.0]),
]
TWO_LINK_STEPS = 200

DISTURBANCE_STEPS = 200
DEFAULT_SEED = 2024

MULTI_N_HORIZONS = list(range(26))
MULTI_N_SPARSE = [0, 100]
MULTI_N_DENSE = list(range(101))
