# Domain and result models
