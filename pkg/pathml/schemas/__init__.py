"""pydantic 文档模型（配置文件、测量信封、报告、模型文件）。"""
