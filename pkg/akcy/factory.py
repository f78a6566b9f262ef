class ModelFactory:
    model_name = None

    def __call__(self, ledger):
        """
        Create the model class unless the ledger's declarative registry
        already holds one under :attr:`model_name`.
        """
        Base = ledger.declarative_base
        registry = Base.registry._class_registry
        if self.model_name not in registry:
            return self.create_class(ledger)
        return registry[self.model_name]

    def create_class(self, ledger):
        raise NotImplementedError
