"""工具输出解析器。"""
