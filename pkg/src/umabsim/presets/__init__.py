"""Bundled experiment configs; list them with `umabsim presets`."""
