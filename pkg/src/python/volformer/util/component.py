# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Base classes for the JSON-encodable records used across volformer, such as configs,
subjects and reports."""

from __future__ import annotations

import hashlib
import json
import os
from enum import Enum
from typing import Any, Dict, Type, TypeVar

from pydantic import BaseModel, ConfigDict

TComponent = TypeVar("TComponent", bound="ComponentModel")


class ComponentModel(BaseModel):
    """A base class for records that need to handle bundling/unbundling for JSON. Unknown
    keys are rejected so typos in hand-written JSON surface as errors."""

    model_config = ConfigDict(extra="forbid", validate_assignment=True)

    def bundle(self) -> Dict[str, Any]:
        """Generates a JSON encodable bundle, leaving out values that equal their defaults.

        Returns:
            Dict[str, Any]: The encodable bundle.
        """

        return self.model_dump(mode="json", exclude_defaults=True)

    def full_bundle(self) -> Dict[str, Any]:
        """Generates a JSON encodable bundle including default values.

        Returns:
            Dict[str, Any]: The encodable bundle.
        """

        return self.model_dump(mode="json")

    def to_json(self, indent: int = 4) -> str:
        """Encodes the full bundle as canonical JSON with sorted keys.

        Args:
            indent (int, optional): The indentation. Defaults to 4.

        Returns:
            str: The JSON text.
        """

        return json.dumps(self.full_bundle(), indent=indent, sort_keys=True)

    def digest(self) -> str:
        """A sha256 digest of the canonical JSON of the full bundle.

        Returns:
            str: The hex digest.
        """

        canonical = json.dumps(self.full_bundle(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("UTF-8")).hexdigest()

    def write(self, file_path: str) -> None:
        """Writes the component to a file as canonical JSON.

        Args:
            file_path (str): The file to write to.
        """

        directory = os.path.dirname(file_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(file_path, "w", encoding="UTF-8") as out_file:
            out_file.write(self.to_json())
            out_file.write("\n")
            out_file.flush()

    @classmethod
    def from_data(cls: Type[TComponent], data: Dict[str, Any]) -> TComponent:
        """Produces an instance of the component from decoded data.

        Args:
            data (Dict[str, Any]): The JSON decoded data.

        Returns:
            TComponent: An instance of the component.
        """

        return cls.model_validate(data)

    @classmethod
    def from_json(cls: Type[TComponent], text: str) -> TComponent:
        """Builds the component from JSON text.

        Args:
            text (str): The JSON encoded component.

        Returns:
            TComponent: An instance of the component.
        """

        return cls.from_data(json.loads(text))

    @classmethod
    def read(cls: Type[TComponent], file_path: str) -> TComponent:
        """Reads the component from a JSON encoded file.

        Args:
            file_path (str): The path of the file.

        Returns:
            TComponent: An instance of the component.
        """

        with open(file_path, "r", encoding="UTF-8") as in_file:
            return cls.from_json(in_file.read())

    def __repr__(self) -> str:
        fields = type(self).model_fields
        if len(fields) < 2:
            return super().__repr__()
        lines = [f"{self.__class__.__name__}("]
        for name in fields:
            field_val = getattr(self, name)
            if isinstance(field_val, list) and len(field_val) > 1:
                lines.append(f"\t{name}=[")
                lines.extend([f"\t\t{val!r},".replace("\n", "\n\t\t") for val in field_val])
                lines.append("\t],")
            elif isinstance(field_val, dict) and len(field_val) > 1:
                lines.append(f"\t{name}=" + "{")
                field_lines = [f"\t\t{key}={val!r}," for key, val in field_val.items()]
                lines.extend([line.replace("\n", "\n\t\t") for line in field_lines])
                lines.append("\t},")
            elif isinstance(field_val, Enum):
                lines.append(f"\t{name}={field_val.value!r},")
            else:
                lines.append(f"\t{name}={field_val!r},".replace("\n", "\n\t"))
        lines.append(")")
        return "\n".join(lines).replace("\t", "    ")
