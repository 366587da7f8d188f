"""devsurf: tangent developables, their plane development and developability checks"""
