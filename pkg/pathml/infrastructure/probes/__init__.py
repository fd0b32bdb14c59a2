"""探测后端实现：真实 SCION 工具的子进程适配器（模拟器后端见 pathml.simnet）。"""
