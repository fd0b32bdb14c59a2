"""pathml：SCION 路径测量采集、数据集构建与机器学习基准。"""
