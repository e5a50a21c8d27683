# Utils package for the acoustic injection simulator
