# Domain Entities Package