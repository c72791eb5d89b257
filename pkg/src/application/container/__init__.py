# Container Package