"""领域模型。"""
