import os
import senate_simulator.settings as settings

ROOT = os.path.dirname(os.path.abspath(__file__))

#: Sample scenario shipped with the documentation
SAMPLE = os.path.join(ROOT, "..", "docs", "source", "scenario.cfg")


def small_scenario(**kwargs) -> settings.ScenarioConfig:
    """A scenario small enough to play many episodes in a test."""
    values = dict(n_nodes=20,
                  n_candidates=10,
                  n_senators=4,
                  agreement_fault_budget=1,
                  chorus_slots=200,
                  episodes=3)
    values.update(kwargs)
    return settings.ScenarioConfig(values)
