"""JSON 测量记录 → CSV 表，以及按路径组装的时间序列与窗口化样本。"""
