# Orchestrator Package