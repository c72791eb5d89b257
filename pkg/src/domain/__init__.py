# Domain Package