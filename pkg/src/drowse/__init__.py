"""Office drowsiness monitoring from mouse/keyboard telemetry."""

__version__ = "0.1.0"
