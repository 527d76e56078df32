"""vqescan: torsional reaction-path scans on Born-Oppenheimer surfaces,
solved point by point with a variational quantum eigensolver on a built-in
statevector simulator."""

__version__ = "0.1.0"
