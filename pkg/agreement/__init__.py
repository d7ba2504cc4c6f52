# Agreement package
