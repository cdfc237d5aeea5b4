# orchestrator/__init__.py
"""
contactlab run orchestration

- context: RunContext and the lazily computed PointContext
- run_orchestrator: config resolution, point-parallel suite execution, report assembly
"""

__version__ = "0.1.0"

ENGINE_VERSION = f"contactlab {__version__}"

__all__ = ['__version__', 'ENGINE_VERSION']
