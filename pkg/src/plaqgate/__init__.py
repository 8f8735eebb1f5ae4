"""Singlet-plaquette qubits: exact spin models, echoed entangling gates,
optimal-control pulses, and orbital-tunneling geometric phases."""

__version__ = "0.1.0"
