"""领域层：类型、错误与端口定义。"""
