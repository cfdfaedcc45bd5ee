"""Software twin of a two-finger pneumatic thermal-haptic wearable.

Subpackages model the physical actuator (thermal, pneumatic, force map),
its firmware (control loop, wire protocol, device emulator), the virtual
manipulation world, and the experiment harness that exercises all of it.
"""

__version__ = "0.1.0"
