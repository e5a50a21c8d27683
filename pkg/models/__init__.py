# Models package for the acoustic injection simulator
