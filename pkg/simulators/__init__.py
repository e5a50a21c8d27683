# Simulators package: acoustics, storage, cache, distributed systems, workloads and the event engine
