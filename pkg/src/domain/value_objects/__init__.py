# Domain Value Objects Package