# Analyzers package: curve distance and the throughput-profile detector
