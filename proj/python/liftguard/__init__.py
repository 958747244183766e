"""Stealthy-attack analysis of sampled-data loops with dual-rate lifting."""

import json
import os

from ._core import (
    LiftguardError,
    __version__,
    discretize,
    exit_code,
    lift,
    transmission_zeros,
)
from . import _core

__all__ = [
    "LiftguardError",
    "__version__",
    "analyze",
    "attack",
    "discretize",
    "exit_code",
    "lift",
    "simulate",
    "transmission_zeros",
    "verify",
]


def _plant_text(plant):
    if isinstance(plant, dict):
        return json.dumps(plant)
    if isinstance(plant, (str, os.PathLike)) and os.path.exists(plant):
        with open(plant, encoding="utf-8") as f:
            return f.read()
    return str(plant)


def analyze(plant, m="auto", theta=0.01, seed=0):
    """Vulnerability report for a plant dict, JSON text or file path."""
    return json.loads(_core.analyze(_plant_text(plant), str(m), theta, seed))


def attack(plant, channel="actuator", mode="single", horizon=None, theta=0.01, seed=0):
    """Attack plan report; the plan itself is under the "plan" key."""
    return json.loads(_core.attack(_plant_text(plant), channel, mode, horizon, theta, seed))


def simulate(plant, plan=None, mode="single", m="auto", horizon=None, theta=0.01, seed=0):
    """Closed-loop run. Returns (report dict, trace CSV text, intersample CSV text)."""
    plan_text = None if plan is None else json.dumps(plan) if isinstance(plan, dict) else plan
    report, trace, fine = _core.simulate(_plant_text(plant), plan_text, mode, str(m), horizon, theta, seed)
    return json.loads(report), trace, fine


def verify(trials=100, seed=0, inject_fault=False):
    """Randomized property-suite report."""
    return json.loads(_core.verify(trials, seed, inject_fault))
