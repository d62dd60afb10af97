"""Variable-scaling rate-control teleoperation stack.

Forward-control methods that map 2-axis stick input to a simulated
robot's commanded velocity, including risk-field methods that provably
zero the command before a collision; plus a deterministic simulator,
trial metrics, scripted operators, a batch experiment runner, and a
live cockpit service.
"""

__version__ = "0.1.0"

from .environment import (
    EnvironmentSpec,
    ObstacleCloud,
    load_environment,
    load_shipped_environment,
    robot_wall_contact,
    sample_obstacles,
)
from .geometry import Capsule, Segment, Vec2
from .riskfield import ControlParams, LocalFrame, RiskReport, RobotState, assess
from .scaling import JoystickInput, Method, VelocityCommand, compute_command
from .session import Session, SessionConfig
from .simulator import SimConfig, StepResult, run, step
from .trial import TickLog, TrialMetrics, TrialState, metrics, read_log, update, write_log

__all__ = [
    "Capsule",
    "ControlParams",
    "EnvironmentSpec",
    "JoystickInput",
    "LocalFrame",
    "Method",
    "ObstacleCloud",
    "RiskReport",
    "RobotState",
    "Segment",
    "Session",
    "SessionConfig",
    "SimConfig",
    "StepResult",
    "TickLog",
    "TrialMetrics",
    "TrialState",
    "Vec2",
    "VelocityCommand",
    "assess",
    "compute_command",
    "load_environment",
    "load_shipped_environment",
    "metrics",
    "read_log",
    "robot_wall_contact",
    "run",
    "sample_obstacles",
    "step",
    "update",
    "write_log",
    "__version__",
]
