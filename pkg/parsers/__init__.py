# Parsers package for the acoustic injection simulator
