# Makes regime_modules a package; regime_classifier imports the plugins by name.
# Each <name>_module.py exposes a <Name>Regime subclass of BaseRegime.
AVAILABLE_MODULES = ['outer_module', 'inner1_module', 'inner2_module', 'elliptic_module', 'kuzmak_module']
